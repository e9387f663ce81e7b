#pragma once

// Word-similarity metrics for multi-sense spaces (avgSim, avgSimC, localSim),
// Spearman correlation, and the WordSim-353 / SCWS drivers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psense/detail/text.hpp"
#include "psense/embedding_store.hpp"
#include "psense/errors.hpp"

namespace psense {

inline constexpr double kDefaultTemperature = 1.0;
inline constexpr std::size_t kDefaultWindow = 5;

// Exact-case lookup first, lowercase only as a fallback.
inline std::optional<std::string> resolve_word(const EmbeddingSet& set, std::string_view word) {
  if (set.contains_word(word)) return std::string(word);
  auto lower = detail::to_lower(word);
  if (set.contains_word(lower)) return lower;
  return std::nullopt;
}

namespace detail {

inline std::span<const std::size_t> require_word(const EmbeddingSet& set, std::string_view word) {
  const auto rows = set.rows_of(word);
  if (rows.empty()) throw KeyNotFoundError("unknown word '" + std::string(word) + "'");
  return rows;
}

}  // namespace detail

// Mean cosine over all sense pairs of two words.
inline double avg_sim(const EmbeddingSet& set, std::string_view w1, std::string_view w2) {
  const auto r1 = detail::require_word(set, w1);
  const auto r2 = detail::require_word(set, w2);
  double total = 0.0;
  for (const auto i : r1)
    for (const auto j : r2) total += sense_cosine(set, i, j);
  return total / static_cast<double>(r1.size() * r2.size());
}

// Mean, over the in-vocabulary tokens within `window` positions of the
// target, of each token's mean sense vector. Zero if no token is known.
inline Vector context_vector(const EmbeddingSet& set, std::span<const std::string> tokens, std::size_t target,
                             std::size_t window = kDefaultWindow) {
  Vector c = Vector::Zero(static_cast<Eigen::Index>(set.dim()));
  if (tokens.empty()) return c;
  const std::size_t lo = target > window ? target - window : 0;
  const std::size_t hi = std::min(tokens.size() - 1, target + window);
  std::size_t known = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (i == target) continue;
    const auto word = resolve_word(set, tokens[i]);
    if (!word) continue;
    const auto rows = set.rows_of(*word);
    Vector mean = Vector::Zero(c.size());
    for (const auto r : rows) mean += set.row(r).transpose();
    c += mean / static_cast<double>(rows.size());
    ++known;
  }
  if (known > 0) c /= static_cast<double>(known);
  return c;
}

struct SensePosterior {
  std::string word;
  std::vector<double> probs;
};

// Softmax over cosine(sense, context) / tau; uniform for a zero context.
inline SensePosterior sense_posterior(const EmbeddingSet& set, std::string_view word, const Vector& context,
                                      double tau = kDefaultTemperature) {
  if (!(tau > 0.0)) throw InvalidArgumentError("sense_posterior: temperature must be positive");
  const auto rows = detail::require_word(set, word);
  SensePosterior post{std::string(word), std::vector<double>(rows.size(), 1.0 / static_cast<double>(rows.size()))};
  if (rows.size() == 1) {
    post.probs[0] = 1.0;
    return post;
  }
  if (context.isZero(0.0)) return post;
  std::vector<double> logits(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) logits[i] = cosine(set.row(rows[i]), context) / tau;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) z += (post.probs[i] = std::exp(logits[i] - peak));
  for (auto& p : post.probs) p /= z;
  return post;
}

// avgSimC, keeping the 1/(K K') factor next to the posteriors as the
// metric is usually written.
inline double avg_sim_c(const EmbeddingSet& set, std::string_view w1, const Vector& c1, std::string_view w2,
                        const Vector& c2, double tau = kDefaultTemperature) {
  const auto r1 = detail::require_word(set, w1);
  const auto r2 = detail::require_word(set, w2);
  const auto p1 = sense_posterior(set, w1, c1, tau);
  const auto p2 = sense_posterior(set, w2, c2, tau);
  double total = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i)
    for (std::size_t j = 0; j < r2.size(); ++j)
      total += p1.probs[i] * p2.probs[j] * sense_cosine(set, r1[i], r2[j]);
  return total / static_cast<double>(r1.size() * r2.size());
}

// Index of the most probable sense; the lowest index wins ties.
inline std::size_t argmax_sense(const SensePosterior& p) {
  return static_cast<std::size_t>(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin());
}

inline double local_sim(const EmbeddingSet& set, std::string_view w1, const Vector& c1, std::string_view w2,
                        const Vector& c2, double tau = kDefaultTemperature) {
  const auto r1 = detail::require_word(set, w1);
  const auto r2 = detail::require_word(set, w2);
  const auto k1 = argmax_sense(sense_posterior(set, w1, c1, tau));
  const auto k2 = argmax_sense(sense_posterior(set, w2, c2, tau));
  return sense_cosine(set, r1[k1], r2[k2]);
}

// Fractional (average) ranks, 1-based.
inline std::vector<double> fractional_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Spearman rho with tie-averaged ranks. NaN when either side is constant.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgumentError("spearman: length mismatch");
  if (xs.size() < 2) throw InvalidArgumentError("spearman: need at least two observations");
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Datasets

struct WordPairJudgment {
  std::string w1;
  std::string w2;
  double human_score = 0.0;
};

struct ContextualPairJudgment {
  std::string w1;
  std::string w2;
  std::vector<std::string> ctx1;
  std::size_t pos1 = 0;
  std::vector<std::string> ctx2;
  std::size_t pos2 = 0;
  double human_score = 0.0;
};

// "word1,word2,score"; a single leading header line is tolerated.
inline std::vector<WordPairJudgment> load_wordsim(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<WordPairJudgment> out;
  bool first = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto f = detail::split(lines[i], ',');
    const auto score = f.size() == 3 ? detail::parse_double(detail::trim(f[2])) : std::nullopt;
    if (!score) {
      if (first && f.size() == 3) {
        first = false;
        continue;
      }
      throw ParseError(path, i + 1, "expected word1,word2,score");
    }
    first = false;
    WordPairJudgment j{std::string(detail::trim(f[0])), std::string(detail::trim(f[1])), *score};
    if (j.w1.empty() || j.w2.empty()) throw ParseError(path, i + 1, "empty word");
    if (*score < 0.0 || *score > 10.0) throw ParseError(path, i + 1, "score outside [0, 10]");
    out.push_back(std::move(j));
  }
  return out;
}

// Tokenizes a context and locates the <b>...</b>-wrapped target, removing
// the markers. Accepts "<b> w </b>" as well as "<b>w</b>".
inline std::vector<std::string> parse_marked_context(std::string_view ctx, std::size_t& target) {
  std::vector<std::string> tokens;
  std::optional<std::size_t> found;
  bool open = false;
  for (auto tok : detail::split_ws(ctx)) {
    if (tok == "<b>") {
      open = true;
      continue;
    }
    if (tok == "</b>") {
      open = false;
      continue;
    }
    bool marked = open;
    if (tok.starts_with("<b>")) {
      tok.remove_prefix(3);
      marked = true;
      open = true;
    }
    if (tok.ends_with("</b>")) {
      tok.remove_suffix(4);
      open = false;
    }
    if (tok.empty()) continue;
    if (marked && !found) found = tokens.size();
    tokens.emplace_back(tok);
  }
  if (!found) throw InvalidArgumentError("context has no <b>target</b> marker");
  target = *found;
  return tokens;
}

inline std::vector<ContextualPairJudgment> load_scws(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<ContextualPairJudgment> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto f = detail::split(lines[i], '\t');
    if (f.size() < 8) throw ParseError(path, i + 1, "expected at least 8 tab-separated fields");
    const auto score = detail::parse_double(detail::trim(f[7]));
    if (!score) throw ParseError(path, i + 1, "malformed average score");
    ContextualPairJudgment j;
    j.w1 = std::string(detail::trim(f[1]));
    j.w2 = std::string(detail::trim(f[3]));
    if (j.w1.empty() || j.w2.empty()) throw ParseError(path, i + 1, "empty word");
    try {
      j.ctx1 = parse_marked_context(f[5], j.pos1);
      j.ctx2 = parse_marked_context(f[6], j.pos2);
    } catch (const InvalidArgumentError& e) {
      throw ParseError(path, i + 1, e.what());
    }
    j.human_score = *score;
    out.push_back(std::move(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Drivers

struct WordSimScore {
  double rho100 = std::numeric_limits<double>::quiet_NaN();
  std::size_t scored = 0;
  std::size_t skipped = 0;
};

inline WordSimScore eval_wordsim(const EmbeddingSet& set, std::span<const WordPairJudgment> dataset) {
  WordSimScore out;
  std::vector<double> model, human;
  for (const auto& j : dataset) {
    const auto a = resolve_word(set, j.w1);
    const auto b = resolve_word(set, j.w2);
    if (!a || !b) {
      ++out.skipped;
      continue;
    }
    model.push_back(avg_sim(set, *a, *b));
    human.push_back(j.human_score);
  }
  out.scored = model.size();
  if (model.size() >= 2) out.rho100 = 100.0 * spearman(model, human);
  return out;
}

struct ScwsScore {
  double local_sim = std::numeric_limits<double>::quiet_NaN();
  double avg_sim = std::numeric_limits<double>::quiet_NaN();
  double avg_sim_c = std::numeric_limits<double>::quiet_NaN();
  std::size_t scored = 0;
  std::size_t skipped = 0;
};

struct ScwsPairScores {
  double local_sim;
  double avg_sim;
  double avg_sim_c;
};

inline ScwsPairScores score_contextual_pair(const EmbeddingSet& set, const std::string& w1, const Vector& c1,
                                           const std::string& w2, const Vector& c2, double tau) {
  return {local_sim(set, w1, c1, w2, c2, tau), avg_sim(set, w1, w2), avg_sim_c(set, w1, c1, w2, c2, tau)};
}

inline ScwsScore eval_scws(const EmbeddingSet& set, std::span<const ContextualPairJudgment> dataset,
                           double tau = kDefaultTemperature, std::size_t window = kDefaultWindow) {
  ScwsScore out;
  std::vector<double> local, avg, avgc, human;
  for (const auto& j : dataset) {
    const auto a = resolve_word(set, j.w1);
    const auto b = resolve_word(set, j.w2);
    if (!a || !b) {
      ++out.skipped;
      continue;
    }
    const auto c1 = context_vector(set, j.ctx1, j.pos1, window);
    const auto c2 = context_vector(set, j.ctx2, j.pos2, window);
    const auto s = score_contextual_pair(set, *a, c1, *b, c2, tau);
    local.push_back(s.local_sim);
    avg.push_back(s.avg_sim);
    avgc.push_back(s.avg_sim_c);
    human.push_back(j.human_score);
  }
  out.scored = human.size();
  if (human.size() >= 2) {
    out.local_sim = 100.0 * spearman(local, human);
    out.avg_sim = 100.0 * spearman(avg, human);
    out.avg_sim_c = 100.0 * spearman(avgc, human);
  }
  return out;
}

}  // namespace psense
