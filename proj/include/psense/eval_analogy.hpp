#pragma once

// Analogy evaluation for multi-sense spaces. A quadruple w1:w2 :: w3:w4
// asserts v1 - v2 = v3 - v4. It is correct when, for some target position and
// some choice of senses, the target's sense is the cosine-nearest row to the
// signed sum of the other three taken from that identity.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "psense/detail/parallel.hpp"
#include "psense/detail/text.hpp"
#include "psense/embedding_store.hpp"
#include "psense/errors.hpp"
#include "psense/eval_similarity.hpp"

namespace psense {

enum class AnalogySection { kSemantic, kSyntactic };

struct Quadruple {
  std::string w1, w2, w3, w4;
  std::string category;
  AnalogySection section = AnalogySection::kSyntactic;
};

enum class AnalogyOutcome { kCorrect, kIncorrect, kSkipped };

// The five semantic relation families of the standard question set; every
// other category is syntactic.
inline bool is_semantic_category(std::string_view category) {
  static constexpr std::array<std::string_view, 5> kSemantic = {"capital-common-countries", "capital-world",
                                                                "currency", "city-in-state", "family"};
  return std::find(kSemantic.begin(), kSemantic.end(), category) != kSemantic.end();
}

inline std::vector<Quadruple> load_analogy(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<Quadruple> out;
  std::optional<std::string> category;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty()) continue;
    if (line.front() == ':') {
      const auto name = detail::trim(line.substr(1));
      if (name.empty()) throw ParseError(path, i + 1, "empty category header");
      category = std::string(name);
      continue;
    }
    const auto f = detail::split_ws(line);
    if (f.size() != 4) throw ParseError(path, i + 1, "expected 4 words, got " + std::to_string(f.size()));
    if (!category) throw ParseError(path, i + 1, "question before any ': <category>' header");
    out.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]), *category,
                   is_semantic_category(*category) ? AnalogySection::kSemantic : AnalogySection::kSyntactic});
  }
  return out;
}

namespace detail {

inline constexpr Eigen::Index kAnalogyBlockRows = 4096;

}  // namespace detail

// True iff some sense combination of (a, b, c) puts a sense of `target` at
// the top of the cosine ranking of a - b + c, with every sense of a, b and c
// removed from the candidates. Equal scores resolve to the lower row id.
inline bool predict_direction(const EmbeddingSet& set, std::string_view a, std::string_view b, std::string_view c,
                              std::string_view target) {
  const auto ra = detail::require_word(set, a);
  const auto rb = detail::require_word(set, b);
  const auto rc = detail::require_word(set, c);
  const auto rt = detail::require_word(set, target);

  const auto dim = static_cast<Eigen::Index>(set.dim());
  RowMatrix queries(static_cast<Eigen::Index>(ra.size() * rb.size() * rc.size()), dim);
  Eigen::Index count = 0;
  for (const auto ia : ra)
    for (const auto ib : rb)
      for (const auto ic : rc) {
        const Eigen::RowVectorXd q = set.row(ia) - set.row(ib) + set.row(ic);
        const double n = q.norm();
        if (n == 0.0) continue;
        queries.row(count++) = q / n;
      }
  if (count == 0) return false;
  queries.conservativeResize(count, dim);

  std::vector<std::size_t> excluded(ra.begin(), ra.end());
  excluded.insert(excluded.end(), rb.begin(), rb.end());
  excluded.insert(excluded.end(), rc.begin(), rc.end());
  std::sort(excluded.begin(), excluded.end());

  std::vector<double> best_score(static_cast<std::size_t>(count), -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_row(static_cast<std::size_t>(count), static_cast<std::size_t>(-1));
  const auto& unit = set.unit_rows();
  const auto total = unit.rows();
  Eigen::MatrixXd scores;
  for (Eigen::Index start = 0; start < total; start += detail::kAnalogyBlockRows) {
    const auto len = std::min(detail::kAnalogyBlockRows, total - start);
    scores.noalias() = unit.middleRows(start, len) * queries.transpose();
    for (Eigen::Index r = 0; r < len; ++r) {
      const auto row = static_cast<std::size_t>(start + r);
      if (std::binary_search(excluded.begin(), excluded.end(), row) || set.is_zero_row(row)) continue;
      for (Eigen::Index q = 0; q < count; ++q) {
        const auto s = scores(r, q);
        auto& best = best_score[static_cast<std::size_t>(q)];
        if (s > best) {
          best = s;
          best_row[static_cast<std::size_t>(q)] = row;
        }
      }
    }
  }
  for (const auto row : best_row) {
    if (std::find(rt.begin(), rt.end(), row) != rt.end()) return true;
  }
  return false;
}

inline AnalogyOutcome evaluate_quadruple(const EmbeddingSet& set, const Quadruple& q) {
  const auto w1 = resolve_word(set, q.w1);
  const auto w2 = resolve_word(set, q.w2);
  const auto w3 = resolve_word(set, q.w3);
  const auto w4 = resolve_word(set, q.w4);
  if (!w1 || !w2 || !w3 || !w4) return AnalogyOutcome::kSkipped;
  // From v1 - v2 = v3 - v4:
  //   w4 = w2 - w1 + w3,  w1 = w2 - w4 + w3,  w2 = w1 - w3 + w4,  w3 = w1 - w2 + w4
  const bool ok = predict_direction(set, *w2, *w1, *w3, *w4) || predict_direction(set, *w2, *w4, *w3, *w1) ||
                  predict_direction(set, *w1, *w3, *w4, *w2) || predict_direction(set, *w1, *w2, *w4, *w3);
  return ok ? AnalogyOutcome::kCorrect : AnalogyOutcome::kIncorrect;
}

struct AnalogyCounts {
  std::size_t total = 0;
  std::size_t attempted = 0;
  std::size_t correct = 0;
  std::size_t skipped = 0;

  std::optional<double> accuracy() const {
    if (attempted == 0) return std::nullopt;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(attempted);
  }

  void add(AnalogyOutcome o) {
    ++total;
    if (o == AnalogyOutcome::kSkipped) {
      ++skipped;
    } else {
      ++attempted;
      if (o == AnalogyOutcome::kCorrect) ++correct;
    }
  }
};

struct CategoryResult {
  std::string category;
  AnalogySection section;
  AnalogyCounts counts;
};

struct AnalogyResult {
  std::vector<CategoryResult> categories;  // in dataset order
  AnalogyCounts semantic;
  AnalogyCounts syntactic;
  AnalogyCounts overall;
};

inline AnalogyResult evaluate_all(const EmbeddingSet& set, const std::vector<Quadruple>& quads, unsigned threads = 0) {
  std::vector<AnalogyOutcome> outcomes(quads.size());
  detail::parallel_for(
      quads.size(), [&](std::size_t i) { outcomes[i] = evaluate_quadruple(set, quads[i]); }, threads);

  AnalogyResult result;
  for (std::size_t i = 0; i < quads.size(); ++i) {
    const auto& q = quads[i];
    auto it = std::find_if(result.categories.begin(), result.categories.end(),
                           [&](const CategoryResult& c) { return c.category == q.category; });
    if (it == result.categories.end()) {
      result.categories.push_back({q.category, q.section, {}});
      it = std::prev(result.categories.end());
    }
    it->counts.add(outcomes[i]);
    (q.section == AnalogySection::kSemantic ? result.semantic : result.syntactic).add(outcomes[i]);
    result.overall.add(outcomes[i]);
  }
  return result;
}

}  // namespace psense
