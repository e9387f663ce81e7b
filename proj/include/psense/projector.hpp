#pragma once

// Global linear projection that pulls the members of each pseudo multi-sense
// group onto the group's representative vector.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "psense/detail/parallel.hpp"
#include "psense/detail/text.hpp"
#include "psense/detector.hpp"
#include "psense/embedding_store.hpp"
#include "psense/errors.hpp"

namespace psense {

enum class RepresentativeMode { kMean, kRandom };

struct RepresentativeEntry {
  PseudoGroup group;
  Vector rep;
};

struct RepresentativeAssignment {
  std::vector<RepresentativeEntry> entries;
  RepresentativeMode mode = RepresentativeMode::kMean;
  std::uint64_t seed = 0;
};

struct TrainingPair {
  Vector x;
  Vector target;
};

struct TransitionMatrix {
  Eigen::MatrixXd cells;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(cells.rows()); }

  static TransitionMatrix identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return {Eigen::MatrixXd::Identity(d, d)};
  }
};

enum class InitKind { kIdentity, kZero, kGaussian };

struct TrainingConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  bool shuffle = true;
  InitKind init = InitKind::kIdentity;
  double init_sigma = 0.01;  // only for InitKind::kGaussian
  // Weight of an optional ||Phi - I||^2 penalty. Zero reproduces the plain
  // group-member objective.
  double ridge = 0.0;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw InvalidArgumentError("learning rate must be positive");
    }
    if (epochs < 1) throw InvalidArgumentError("epochs must be >= 1");
    if (init == InitKind::kGaussian && !(init_sigma > 0.0)) throw InvalidArgumentError("init sigma must be positive");
    if (!(ridge >= 0.0)) throw InvalidArgumentError("ridge weight must be >= 0");
  }
};

struct TrainingResult {
  TransitionMatrix phi;
  std::vector<double> loss_curve;  // full-dataset loss after each epoch
};

inline RepresentativeAssignment make_representatives(const EmbeddingSet& set, const std::vector<PseudoGroup>& groups,
                                                     RepresentativeMode mode = RepresentativeMode::kMean,
                                                     std::uint64_t seed = 0) {
  RepresentativeAssignment out{{}, mode, seed};
  out.entries.reserve(groups.size());
  std::mt19937_64 rng(seed);
  for (const auto& g : groups) {
    if (g.members.empty()) throw InvalidArgumentError("make_representatives: empty group for " + g.word);
    std::vector<std::size_t> rows;
    rows.reserve(g.members.size());
    for (const auto k : g.members) rows.push_back(set.row_of({g.word, k}));
    Vector rep;
    if (mode == RepresentativeMode::kMean) {
      rep = Vector::Zero(static_cast<Eigen::Index>(set.dim()));
      for (const auto r : rows) rep += set.row(r).transpose();
      rep /= static_cast<double>(rows.size());
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
      rep = set.row(rows[pick(rng)]).transpose();
    }
    out.entries.push_back({g, std::move(rep)});
  }
  return out;
}

// One (member vector, representative) pair per group member.
inline std::vector<TrainingPair> training_pairs(const EmbeddingSet& set, const RepresentativeAssignment& reps) {
  std::vector<TrainingPair> out;
  for (const auto& e : reps.entries) {
    for (const auto k : e.group.members) {
      out.push_back({set.row(set.row_of({e.group.word, k})).transpose(), e.rep});
    }
  }
  return out;
}

inline double transition_loss(const TransitionMatrix& phi, std::span<const TrainingPair> pairs, double ridge = 0.0) {
  double loss = 0.0;
  for (const auto& p : pairs) loss += (phi.cells * p.x - p.target).squaredNorm();
  if (ridge > 0.0) {
    const auto d = static_cast<Eigen::Index>(phi.dim());
    loss += ridge * (phi.cells - Eigen::MatrixXd::Identity(d, d)).squaredNorm();
  }
  return loss;
}

// Per-sample SGD on sum ||Phi x - x_r||^2. The visiting order, and therefore
// the result, is fixed by cfg.seed.
inline TrainingResult train_transition(std::span<const TrainingPair> pairs, const TrainingConfig& cfg,
                                       std::size_t dim) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(dim);
  for (const auto& p : pairs) {
    if (p.x.size() != d || p.target.size() != d) {
      throw InvalidArgumentError("train_transition: pair dimension does not match " + std::to_string(dim));
    }
  }

  std::mt19937_64 rng(cfg.seed);
  TrainingResult result{TransitionMatrix::identity(dim), {}};
  auto& phi = result.phi.cells;
  switch (cfg.init) {
    case InitKind::kIdentity:
      break;
    case InitKind::kZero:
      phi.setZero();
      break;
    case InitKind::kGaussian: {
      std::normal_distribution<double> normal(0.0, cfg.init_sigma);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) phi(i, j) = normal(rng);
      break;
    }
  }
  if (pairs.empty()) return result;

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  const double ridge_step = 2.0 * cfg.ridge / static_cast<double>(pairs.size());
  Vector residual(d);
  result.loss_curve.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (const auto i : order) {
      const auto& p = pairs[i];
      residual.noalias() = phi * p.x - p.target;
      phi.noalias() -= (2.0 * cfg.learning_rate) * residual * p.x.transpose();
      if (cfg.ridge > 0.0) phi -= cfg.learning_rate * ridge_step * (phi - identity);
    }
    result.loss_curve.push_back(transition_loss(result.phi, pairs, cfg.ridge));
  }
  return result;
}

// Replaces every row v by Phi v. Rows that become zero are kept and show up
// in the result's zero_rows().
inline EmbeddingSet project_space(const EmbeddingSet& set, const TransitionMatrix& phi, unsigned threads = 0) {
  if (phi.dim() != set.dim() || phi.cells.cols() != phi.cells.rows()) {
    throw InvalidArgumentError("project_space: transition matrix is " + std::to_string(phi.cells.rows()) + "x" +
                               std::to_string(phi.cells.cols()) + ", space dim is " + std::to_string(set.dim()));
  }
  const auto d = static_cast<Eigen::Index>(set.dim());
  RowMatrix out(set.rows().rows(), d);
  detail::parallel_for(
      set.size(),
      [&](std::size_t r) {
        const auto i = static_cast<Eigen::Index>(r);
        for (Eigen::Index j = 0; j < d; ++j) {
          double acc = 0.0;
          for (Eigen::Index k = 0; k < d; ++k) acc += phi.cells(j, k) * set.rows()(i, k);
          out(i, j) = acc;
        }
      },
      threads);
  return EmbeddingSet(set.keys(), std::move(out), /*allow_zero_rows=*/true);
}

// ---------------------------------------------------------------------------
// Text format: "D" then D lines of D numbers.

inline void write_transition(std::ostream& out, const TransitionMatrix& phi) {
  out << phi.dim() << '\n';
  for (Eigen::Index i = 0; i < phi.cells.rows(); ++i) {
    for (Eigen::Index j = 0; j < phi.cells.cols(); ++j) {
      out << (j ? " " : "") << detail::format_double(phi.cells(i, j));
    }
    out << '\n';
  }
}

inline TransitionMatrix read_transition(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!detail::trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError(source, line_no, "missing dimension line");
  const auto dim = detail::parse_int<std::size_t>(detail::trim(line));
  if (!dim || *dim == 0) throw ParseError(source, line_no, "malformed dimension");
  const auto d = static_cast<Eigen::Index>(*dim);
  TransitionMatrix phi{Eigen::MatrixXd(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!next_line()) throw ParseError(source, line_no, "expected " + std::to_string(*dim) + " matrix rows");
    const auto fields = detail::split_ws(line);
    if (fields.size() != *dim) throw ParseError(source, line_no, "wrong number of columns");
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto v = detail::parse_double(fields[static_cast<std::size_t>(j)]);
      if (!v || !std::isfinite(*v)) throw ParseError(source, line_no, "malformed matrix entry");
      phi.cells(i, j) = *v;
    }
  }
  if (next_line()) throw ParseError(source, line_no, "trailing data after matrix");
  return phi;
}

inline void save_transition(const TransitionMatrix& phi, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_transition(out, phi);
}

inline TransitionMatrix load_transition(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_transition(in, path);
}

}  // namespace psense
