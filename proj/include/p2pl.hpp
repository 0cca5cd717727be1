#pragma once

#include "p2pl/core.hpp"
#include "p2pl/csv.hpp"
#include "p2pl/encoding.hpp"
#include "p2pl/evaluation.hpp"
#include "p2pl/ingest.hpp"
#include "p2pl/metrics.hpp"
#include "p2pl/ml.hpp"
#include "p2pl/model_io.hpp"
#include "p2pl/pipeline.hpp"
#include "p2pl/recommender.hpp"
#include "p2pl/schema.hpp"
#include "p2pl/select.hpp"
#include "p2pl/sentiment.hpp"
#include "p2pl/sentiment_opt.hpp"
#include "p2pl/stats.hpp"
#include "p2pl/synth.hpp"
#include "p2pl/table.hpp"
#include "p2pl/text.hpp"
