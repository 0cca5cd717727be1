#pragma once

#include "p2pl/schema.hpp"

#include <cctype>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace p2pl {

/// Token valences plus the negation and booster word lists used by the
/// compound sentiment score.
struct SentimentLexicon {
  std::unordered_map<std::string, double> valence;
  std::set<std::string> negations;
  std::unordered_map<std::string, double> boosters;

  static constexpr double kNegationFactor = -0.74;
  static constexpr double kAlpha = 15.0;
  static constexpr std::size_t kWindow = 3;

  bool empty() const { return valence.empty(); }

  /// `token<TAB>valence` lines; extra tab-separated fields are ignored.
  static std::unordered_map<std::string, double> parse_valences(std::string_view text, const std::string& origin) {
    std::unordered_map<std::string, double> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      std::string_view line = text.substr(start, end - start);
      start = end + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos)
        throw DataError(origin + ":" + std::to_string(line_no) + ": expected token<TAB>value");
      auto rest = line.substr(tab + 1);
      rest = rest.substr(0, rest.find('\t'));
      const auto v = parse_double(rest);
      if (!v) throw DataError(origin + ":" + std::to_string(line_no) + ": bad number");
      out[to_lower(line.substr(0, tab))] = *v;
    }
    return out;
  }

  static SentimentLexicon load(const std::string& lexicon_path, const std::string& negations_path = {},
                               const std::string& boosters_path = {}) {
    SentimentLexicon lex;
    lex.valence = parse_valences(read_file(lexicon_path), lexicon_path);
    if (lex.valence.empty()) throw DataError("lexicon '" + lexicon_path + "' is empty");
    if (!negations_path.empty()) {
      for (const auto& line : split(read_file(negations_path), '\n'))
        if (!line.empty() && line.front() != '#') lex.negations.insert(to_lower(line));
    }
    if (!boosters_path.empty()) lex.boosters = parse_valences(read_file(boosters_path), boosters_path);
    return lex;
  }

  static SentimentLexicon load_default() {
    const auto dir = data_dir() + "/lexicon/";
    return load(dir + "vader_lexicon.tsv", dir + "negations.txt", dir + "boosters.tsv");
  }
};

/// Lower-cased word tokens. Letters, digits and inner apostrophes form words;
/// everything else separates them.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    if (!cur.empty()) out.push_back(to_lower(cur));
    cur.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    const bool word = std::isalnum(u) || u >= 0x80 || (c == '\'' && !cur.empty());
    if (word)
      cur.push_back(c);
    else
      flush();
  }
  flush();
  return out;
}

/// s / sqrt(s^2 + alpha), clamped to [-1, 1].
inline double compound_normalize(double s, double alpha = SentimentLexicon::kAlpha) {
  const double v = s / std::sqrt(s * s + alpha);
  return std::clamp(v, -1.0, 1.0);
}

/// Raw valence sum with negation flips and booster increments.
inline double sentiment_sum(const std::vector<std::string>& tokens, const SentimentLexicon& lex) {
  static constexpr double kBoosterDecay[SentimentLexicon::kWindow] = {1.0, 0.95, 0.9};
  const auto is_negation = [&](const std::string& t) {
    return lex.negations.count(t) > 0 || t.find("n't") != std::string::npos;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (lex.boosters.count(tokens[i])) continue;
    const auto it = lex.valence.find(tokens[i]);
    if (it == lex.valence.end()) continue;
    double v = it->second;
    if (v == 0.0) continue;
    bool negated = false;
    for (std::size_t d = 1; d <= SentimentLexicon::kWindow && d <= i; ++d) {
      const auto& prev = tokens[i - d];
      if (auto b = lex.boosters.find(prev); b != lex.boosters.end())
        v += (it->second < 0 ? -b->second : b->second) * kBoosterDecay[d - 1];
      if (is_negation(prev)) negated = true;
    }
    if (negated) v *= SentimentLexicon::kNegationFactor;
    sum += v;
  }
  return sum;
}

/// Compound sentiment score of free text, in [-1, 1]. Empty text scores 0.
inline double sentiment_score(std::string_view text, const SentimentLexicon& lex) {
  return compound_normalize(sentiment_sum(tokenize(text), lex));
}

}  // namespace p2pl
