#pragma once

// HTTP facade over a loaded advisor bundle. Each endpoint is a pure function
// from request body to (status, JSON body); the server only routes to them.

#include "p2pl/recommender.hpp"

#include "httplib.h"

#include <string>
#include <vector>

namespace p2pl::service {

struct Response {
  int status = 200;
  Json body;
};

inline Response error_response(int status, std::string message, Json extra = Json::object()) {
  Json b = std::move(extra);
  b["error"] = std::move(message);
  return {status, std::move(b)};
}

/// Field-level validation failure of a request body.
struct FieldError {
  std::string field;
  std::string message;
};

inline Response bad_request(const std::vector<FieldError>& errors) {
  Json list = Json::array();
  for (const auto& e : errors) list.push_back({{"field", e.field}, {"message", e.message}});
  return error_response(400, "invalid request", {{"fields", list}});
}

/// Immutable state shared by all handlers.
struct Context {
  Advisor advisor;
  SentimentLexicon lexicon;
};

/// A validated recommendation request.
struct RecommendRequest {
  std::string id;
  BorrowerRecord record;
};

inline std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return format_double(v.get<double>());
}

/// Checks the shape of a recommend body:
///   {"id": str|num?, "fields": {name: str|num}, "description": str?, "max_rate": num?}
/// `description` fills the Description field and `max_rate` BorrowerMaximumRate.
inline std::variant<RecommendRequest, std::vector<FieldError>> parse_recommend(const Json& body) {
  std::vector<FieldError> errs;
  RecommendRequest req;
  if (!body.is_object()) return std::vector<FieldError>{{"", "body must be a JSON object"}};
  if (body.contains("id")) {
    const Json& id = body["id"];
    if (id.is_string() || id.is_number()) req.id = scalar_text(id);
    else errs.push_back({"id", "must be a string or number"});
  }
  if (!body.contains("fields")) {
    errs.push_back({"fields", "required"});
  } else if (!body["fields"].is_object()) {
    errs.push_back({"fields", "must be an object of field name to value"});
  } else {
    for (const auto& [name, v] : body["fields"].items()) {
      if (v.is_string() || (v.is_number() && std::isfinite(v.get<double>()))) {
        req.record.fields[name] = scalar_text(v);
      } else if (!v.is_null()) {
        errs.push_back({"fields." + name, "must be a string or finite number"});
      }
    }
  }
  if (body.contains("description")) {
    if (body["description"].is_string()) req.record.fields["Description"] = body["description"].get<std::string>();
    else errs.push_back({"description", "must be a string"});
  }
  if (body.contains("max_rate")) {
    const Json& r = body["max_rate"];
    if (!r.is_number()) errs.push_back({"max_rate", "must be a number"});
    else if (!(r.get<double>() >= 0.0 && r.get<double>() <= 1.0)) errs.push_back({"max_rate", "must lie in [0, 1]"});
    else req.record.fields["BorrowerMaximumRate"] = format_double(r.get<double>());
  }
  if (!errs.empty()) return errs;
  req.record.id = req.id;
  return req;
}

/// Response body for one record: the serialized recommendation plus the id.
inline Json recommend_body(const Context& ctx, const BorrowerRecord& record, const FeatureOverrides& overrides = {}) {
  Json j = to_json(recommend(record, ctx.advisor, ctx.lexicon, overrides));
  j["id"] = record.id;
  return j;
}

/// Runs `fn`, mapping a missing feature to 422 naming it, other data errors
/// to 422 with the message, and anything else to 500.
template <class F>
Response guarded(F&& fn) {
  try {
    return fn();
  } catch (const MissingFeature& e) {
    return error_response(422, e.what(), {{"feature", e.feature()}});
  } catch (const DataError& e) {
    return error_response(422, e.what());
  } catch (const std::exception& e) {
    return error_response(500, std::string("internal error: ") + e.what());
  }
}

inline Response handle_health(const Context& ctx) {
  const auto model = [](const TrainedModel& m) {
    return Json{{"kind", std::string(to_string(m.kind()))},
                {"task", std::string(to_string(m.task()))},
                {"features", m.feature_names()},
                {"n_train", m.n_train()},
                {"format_version", kModelFormatVersion}};
  };
  Json b{{"status", "ok"},
         {"bundle_format", std::string(kBundleFormat)},
         {"seed", ctx.advisor.seed},
         {"models",
          {{"trad_rate", model(ctx.advisor.trad_rate)},
           {"bid_rate", model(ctx.advisor.bid_rate)},
           {"success", model(ctx.advisor.success)}}}};
  b["g_star"] = ctx.advisor.g_star ? Json(*ctx.advisor.g_star) : Json(nullptr);
  return {200, std::move(b)};
}

inline Response handle_schema(const Context& ctx) {
  const Advisor& a = ctx.advisor;
  Json fields = Json::array();
  for (const ColumnRule* r : a.required_columns()) {
    Json used = Json::array();
    const auto uses = [&](const TrainedModel& m, const EncodingSchema& s) {
      for (const auto& f : m.feature_names()) {
        const ColumnRule* q = f == kDescriptionLength ? s.find("Description") : s.find_encoded(f);
        if (q && q->column == r->column) return true;
      }
      return false;
    };
    if (uses(a.trad_rate, a.trad_schema)) used.push_back("trad_rate");
    if (uses(a.bid_rate, a.bid_schema)) used.push_back("bid_rate");
    if (uses(a.success, a.bid_schema)) used.push_back("success");
    Json f{{"name", r->column},
           {"type", std::string(to_string(r->kind))},
           {"rule", std::string(to_string(r->rule))},
           {"classes", r->classes},
           {"used_by", used}};
    if (r->column == "BorrowerMaximumRate") f["range"] = {0.0, 1.0};
    if (r->rule == Rule::sentiment) f["range"] = {-1.0, 1.0};
    fields.push_back(std::move(f));
  }
  Json b{{"fields", fields}, {"whatif_fields", {"max_rate", "sentiment", "loan_amount"}}};
  b["g_star"] = a.g_star ? Json(*a.g_star) : Json(nullptr);
  return {200, std::move(b)};
}

inline Response handle_recommend(const Context& ctx, const Json& body) {
  auto parsed = parse_recommend(body);
  if (auto* errs = std::get_if<std::vector<FieldError>>(&parsed)) return bad_request(*errs);
  const auto& req = std::get<RecommendRequest>(parsed);
  return guarded([&] { return Response{200, recommend_body(ctx, req.record)}; });
}

/// Body: a recommend body plus
///   "field": "max_rate" | "sentiment" | "loan_amount",
///   "values": [numbers]  (or "grid": {"from": a, "to": b, "points": n}).
/// Returns one recommendation per value, in order.
inline Response handle_whatif(const Context& ctx, const Json& body) {
  auto parsed = parse_recommend(body);
  std::vector<FieldError> errs;
  if (auto* e = std::get_if<std::vector<FieldError>>(&parsed)) errs = *e;
  std::string field;
  if (!body.is_object() || !body.contains("field") || !body["field"].is_string()) {
    errs.push_back({"field", "required: one of max_rate, sentiment, loan_amount"});
  } else {
    field = body["field"].get<std::string>();
    if (field != "max_rate" && field != "sentiment" && field != "loan_amount")
      errs.push_back({"field", "must be one of max_rate, sentiment, loan_amount"});
  }
  std::vector<double> values;
  const bool has_values = body.is_object() && body.contains("values");
  const bool has_grid = body.is_object() && body.contains("grid");
  if (has_values == has_grid) {
    errs.push_back({"values", "give exactly one of values or grid"});
  } else if (has_values) {
    const Json& v = body["values"];
    if (!v.is_array() || v.empty()) errs.push_back({"values", "must be a non-empty array of numbers"});
    else
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].is_number() && std::isfinite(v[i].get<double>())) values.push_back(v[i].get<double>());
        else errs.push_back({"values[" + std::to_string(i) + "]", "must be a finite number"});
      }
  } else {
    const Json& g = body["grid"];
    if (!g.is_object() || !g.contains("from") || !g.contains("to") || !g.contains("points") ||
        !g["from"].is_number() || !g["to"].is_number() || !g["points"].is_number_integer()) {
      errs.push_back({"grid", "must be {from: number, to: number, points: integer}"});
    } else {
      const double a = g["from"].get<double>(), b = g["to"].get<double>();
      const auto n = g["points"].get<long long>();
      if (n < 1 || n > 1001) errs.push_back({"grid.points", "must lie in [1, 1001]"});
      else
        for (long long i = 0; i < n; ++i)
          values.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  }
  for (double v : values) {
    if (field == "max_rate" && !(v >= 0.0 && v <= 1.0)) {
      errs.push_back({"values", "max_rate values must lie in [0, 1]"});
      break;
    }
    if (field == "sentiment" && !(v >= -1.0 && v <= 1.0)) {
      errs.push_back({"values", "sentiment values must lie in [-1, 1]"});
      break;
    }
    if (field == "loan_amount" && !(v >= 0.0)) {
      errs.push_back({"values", "loan_amount values must be non-negative"});
      break;
    }
  }
  if (!errs.empty()) return bad_request(errs);

  const auto& req = std::get<RecommendRequest>(parsed);
  return guarded([&] {
    Json responses = Json::array();
    for (double v : values) {
      BorrowerRecord rec = req.record;
      FeatureOverrides overrides;
      if (field == "max_rate") rec.fields["BorrowerMaximumRate"] = format_double(v);
      else if (field == "loan_amount") rec.fields["LoanAmount"] = format_double(v);
      else overrides[std::string(kSentimentFeature)] = v;
      responses.push_back(recommend_body(ctx, rec, overrides));
    }
    return Response{200, Json{{"id", req.id}, {"field", field}, {"values", values}, {"responses", responses}}};
  });
}

/// Parses a request body, answering 400 when it is not JSON.
template <class H>
Response with_json_body(const std::string& text, H&& handler) {
  Json body;
  try {
    body = Json::parse(text);
  } catch (const Json::parse_error& e) {
    return bad_request({{"", std::string("body is not valid JSON: ") + e.what()}});
  }
  return handler(body);
}

/// Routes the endpoints of `ctx` onto `server`. `ctx` must outlive it.
inline void install_routes(httplib::Server& server, const Context& ctx) {
  const auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump() + "\n", "application/json");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/health", [&ctx, send](const httplib::Request&, httplib::Response& res) { send(res, handle_health(ctx)); });
  server.Get("/api/schema",
             [&ctx, send](const httplib::Request&, httplib::Response& res) { send(res, handle_schema(ctx)); });
  server.Post("/api/recommend", [&ctx, send](const httplib::Request& req, httplib::Response& res) {
    send(res, with_json_body(req.body, [&](const Json& b) { return handle_recommend(ctx, b); }));
  });
  server.Post("/api/whatif", [&ctx, send](const httplib::Request& req, httplib::Response& res) {
    send(res, with_json_body(req.body, [&](const Json& b) { return handle_whatif(ctx, b); }));
  });
  server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "unknown";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, error_response(500, "internal error: " + what));
  });
}

/// Splits "host:port"; the port must be a number in [0, 65535].
inline std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0) throw std::invalid_argument("--bind expects host:port, got '" + bind + "'");
  const auto port = parse_double(bind.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535 || *port != std::floor(*port))
    throw std::invalid_argument("--bind: bad port in '" + bind + "'");
  return {bind.substr(0, colon), static_cast<int>(*port)};
}

}  // namespace p2pl::service
