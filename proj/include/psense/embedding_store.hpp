#pragma once

// Multi-sense embedding storage: loading, saving, cosine similarity and
// exhaustive top-k neighbor search.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psense/detail/text.hpp"
#include "psense/errors.hpp"

namespace psense {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultNeighborCount = 10;

struct SenseKey {
  std::string word;
  std::size_t sense = 0;

  auto operator<=>(const SenseKey&) const = default;

  std::string to_string() const { return word + "#" + std::to_string(sense); }
};

inline std::ostream& operator<<(std::ostream& os, const SenseKey& key) {
  return os << key.word << '#' << key.sense;
}

// Cosine similarity of two equal-length vectors, clamped to [-1, 1].
template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  if (u.size() != v.size()) {
    throw InvalidArgumentError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                               std::to_string(v.size()) + ")");
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw UndefinedSimilarityError("cosine: zero vector");
  const double c = u.dot(v) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

// Immutable, sense-indexed set of dense vectors. Rows keep their input
// order; a unit-normalized copy is precomputed for batch search.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  // Zero rows are rejected unless allow_zero_rows is set (used for
  // projected spaces, where they are tracked and reported instead).
  EmbeddingSet(std::vector<SenseKey> keys, RowMatrix rows, bool allow_zero_rows = false)
      : keys_(std::move(keys)), rows_(std::move(rows)) {
    if (rows_.rows() != static_cast<Eigen::Index>(keys_.size())) {
      throw InvalidArgumentError("EmbeddingSet: key count does not match row count");
    }
    if (rows_.cols() == 0 && !keys_.empty()) throw InvalidArgumentError("EmbeddingSet: dim must be positive");

    for (std::size_t i = 0; i < keys_.size(); ++i) {
      const auto& key = keys_[i];
      if (key.word.empty()) throw InvalidArgumentError("EmbeddingSet: empty word at row " + std::to_string(i));
      if (std::any_of(key.word.begin(), key.word.end(),
                      [](unsigned char c) { return std::isspace(c) != 0; })) {
        throw InvalidArgumentError("EmbeddingSet: word contains whitespace: '" + key.word + "'");
      }
      auto& slots = by_word_[key.word];
      if (slots.size() <= key.sense) slots.resize(key.sense + 1, kNoRow);
      if (slots[key.sense] != kNoRow) throw DuplicateKeyError("duplicate sense key " + key.to_string());
      slots[key.sense] = i;
    }
    for (const auto& [word, slots] : by_word_) {
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (slots[s] == kNoRow) {
          throw InvalidArgumentError("EmbeddingSet: senses of '" + word + "' are not contiguous (missing #" +
                                     std::to_string(s) + ")");
        }
      }
      words_.push_back(word);
    }

    unit_ = rows_;
    for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
      if (!rows_.row(i).allFinite()) {
        throw InvalidVectorError("EmbeddingSet: non-finite entry in " + keys_[i].to_string());
      }
      const double n = rows_.row(i).norm();
      if (n == 0.0) {
        if (!allow_zero_rows) throw InvalidVectorError("EmbeddingSet: zero vector for " + keys_[i].to_string());
        zero_rows_.push_back(static_cast<std::size_t>(i));
      } else {
        unit_.row(i) /= n;
      }
    }
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  std::size_t size() const noexcept { return keys_.size(); }

  const SenseKey& key(std::size_t row) const { return keys_.at(row); }
  const std::vector<SenseKey>& keys() const noexcept { return keys_; }
  const RowMatrix& rows() const noexcept { return rows_; }
  const RowMatrix& unit_rows() const noexcept { return unit_; }
  auto row(std::size_t i) const { return rows_.row(static_cast<Eigen::Index>(i)); }

  // Words in lexicographic order.
  const std::vector<std::string>& words() const noexcept { return words_; }

  bool contains_word(std::string_view word) const { return by_word_.find(word) != by_word_.end(); }

  // Row ids of a word's senses, ordered by sense index; empty if unknown.
  std::span<const std::size_t> rows_of(std::string_view word) const {
    const auto it = by_word_.find(word);
    if (it == by_word_.end()) return {};
    return it->second;
  }

  std::size_t sense_count(std::string_view word) const { return rows_of(word).size(); }

  std::optional<std::size_t> find(const SenseKey& key) const {
    const auto rows = rows_of(key.word);
    if (key.sense >= rows.size()) return std::nullopt;
    return rows[key.sense];
  }

  std::size_t row_of(const SenseKey& key) const {
    const auto r = find(key);
    if (!r) throw KeyNotFoundError("unknown sense key " + key.to_string());
    return *r;
  }

  bool is_zero_row(std::size_t row) const {
    return std::binary_search(zero_rows_.begin(), zero_rows_.end(), row);
  }
  const std::vector<std::size_t>& zero_rows() const noexcept { return zero_rows_; }

 private:
  static constexpr std::size_t kNoRow = static_cast<std::size_t>(-1);

  std::vector<SenseKey> keys_;
  RowMatrix rows_;
  RowMatrix unit_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_word_;
  std::vector<std::string> words_;
  std::vector<std::size_t> zero_rows_;
};

inline std::vector<SenseKey> senses_of(const EmbeddingSet& set, std::string_view word) {
  std::vector<SenseKey> out;
  const auto n = set.sense_count(word);
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) out.push_back({std::string(word), s});
  return out;
}

// Cosine between two stored senses; raises UndefinedSimilarityError on zero rows.
inline double sense_cosine(const EmbeddingSet& set, std::size_t a, std::size_t b) {
  return cosine(set.row(a), set.row(b));
}

// ---------------------------------------------------------------------------
// Text format: "<rows> <dim>" header, then "<word> <sense> <v1> ... <vdim>".

inline EmbeddingSet read_embeddings(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  std::size_t declared_rows = 0;
  std::size_t dim = 0;

  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) throw ParseError(source, line_no, "header must be '<row_count> <dim>'");
    const auto r = detail::parse_int<std::size_t>(fields[0]);
    const auto d = detail::parse_int<std::size_t>(fields[1]);
    if (!r || !d || *d == 0) throw ParseError(source, line_no, "malformed header");
    declared_rows = *r;
    dim = *d;
    have_header = true;
    break;
  }
  if (!have_header) throw ParseError(source, line_no, "missing header");

  std::vector<SenseKey> keys;
  keys.reserve(declared_rows);
  RowMatrix rows(static_cast<Eigen::Index>(declared_rows), static_cast<Eigen::Index>(dim));
  std::map<SenseKey, std::size_t> seen;

  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (keys.size() == declared_rows) throw ParseError(source, line_no, "more rows than declared");
    if (fields.size() != dim + 2) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(dim + 2) + " fields, got " + std::to_string(fields.size()));
    }
    const auto sense = detail::parse_int<std::size_t>(fields[1]);
    if (!sense) throw ParseError(source, line_no, "malformed sense index '" + std::string(fields[1]) + "'");
    SenseKey key{std::string(fields[0]), *sense};
    const auto r = static_cast<Eigen::Index>(keys.size());
    for (std::size_t j = 0; j < dim; ++j) {
      const auto v = detail::parse_double(fields[j + 2]);
      if (!v) throw ParseError(source, line_no, "malformed number '" + std::string(fields[j + 2]) + "'");
      if (!std::isfinite(*v)) {
        throw InvalidVectorError(source + ":" + std::to_string(line_no) + ": non-finite entry");
      }
      rows(r, static_cast<Eigen::Index>(j)) = *v;
    }
    if (rows.row(r).isZero(0.0)) {
      throw InvalidVectorError(source + ":" + std::to_string(line_no) + ": zero vector for " + key.to_string());
    }
    if (const auto [it, inserted] = seen.emplace(key, line_no); !inserted) {
      throw DuplicateKeyError(source + ":" + std::to_string(line_no) + ": duplicate sense key " +
                              key.to_string() + " (first seen on line " + std::to_string(it->second) + ")");
    }
    keys.push_back(std::move(key));
  }
  if (keys.size() != declared_rows) {
    throw ParseError(source, line_no,
                     "declared " + std::to_string(declared_rows) + " rows, found " + std::to_string(keys.size()));
  }
  return EmbeddingSet(std::move(keys), std::move(rows));
}

inline EmbeddingSet load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embeddings file " + path);
  return read_embeddings(in, path);
}

inline void write_embeddings(std::ostream& out, const EmbeddingSet& set) {
  out << set.size() << ' ' << set.dim() << '\n';
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& key = set.key(i);
    out << key.word << ' ' << key.sense;
    for (std::size_t j = 0; j < set.dim(); ++j) {
      out << ' ' << detail::format_double(set.rows()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

inline void save_embeddings(const EmbeddingSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_embeddings(out, set);
  if (!out) throw Error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Neighbor search

struct Neighbor {
  SenseKey key;
  std::size_t row = 0;
  double score = 0.0;
};

struct NeighborList {
  SenseKey query;
  std::vector<Neighbor> neighbors;
};

namespace detail {

// Top-m rows by cosine to the given unit query, skipping rows whose word is
// `exclude_word` and zero rows. Ordered by (-score, row id).
inline std::vector<Neighbor> top_rows(const EmbeddingSet& set, const Vector& unit_query, std::string_view exclude_word,
                                      std::size_t m) {
  if (m == 0 || set.size() == 0) return {};
  const Vector scores = set.unit_rows() * unit_query;
  std::vector<std::size_t> candidates;
  candidates.reserve(set.size());
  const auto excluded = set.rows_of(exclude_word);
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (std::find(excluded.begin(), excluded.end(), i) != excluded.end()) continue;
    if (set.is_zero_row(i)) continue;
    candidates.push_back(i);
  }
  const auto take = std::min(m, candidates.size());
  const auto better = [&](std::size_t a, std::size_t b) {
    const double sa = scores[static_cast<Eigen::Index>(a)];
    const double sb = scores[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                    better);
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t k = 0; k < take; ++k) {
    const auto r = candidates[k];
    out.push_back({set.key(r), r, std::clamp(scores[static_cast<Eigen::Index>(r)], -1.0, 1.0)});
  }
  return out;
}

}  // namespace detail

// Top-m senses by cosine to q, excluding every sense of q's own word. Ties
// resolve to the lower row id.
inline NeighborList nearest_neighbors(const EmbeddingSet& set, const SenseKey& q,
                                      std::size_t m = kDefaultNeighborCount) {
  const auto qrow = set.row_of(q);
  NeighborList list{q, {}};
  if (m == 0) return list;
  if (set.is_zero_row(qrow)) throw UndefinedSimilarityError("nearest_neighbors: zero vector for " + q.to_string());
  const Vector unit_query = set.unit_rows().row(static_cast<Eigen::Index>(qrow)).transpose();
  list.neighbors = detail::top_rows(set, unit_query, q.word, m);
  return list;
}

}  // namespace psense
