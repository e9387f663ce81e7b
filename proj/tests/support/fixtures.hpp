#pragma once

// Test fixtures and brute-force oracles. Oracles here are written against
// plain std::vector data and naive loops so they stay independent of the
// library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "psense/psense.hpp"

namespace psense::testing {

using Dense = std::vector<std::vector<double>>;

inline double naive_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<double> row_vec(const EmbeddingSet& set, std::size_t r) {
  std::vector<double> v(set.dim());
  for (std::size_t j = 0; j < set.dim(); ++j) v[j] = set.rows()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
  return v;
}

inline std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t count) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < count; ++i) words.push_back("w" + std::to_string(i));
  std::shuffle(words.begin(), words.end(), rng);
  return words;
}

// Random multi-sense set with `rows` rows spread over words with 1..max_senses senses.
inline EmbeddingSet random_set(std::mt19937_64& rng, std::size_t rows, std::size_t dim, std::size_t max_senses = 3) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> senses(1, max_senses);
  std::vector<SenseKey> keys;
  std::size_t w = 0;
  while (keys.size() < rows) {
    const auto k = std::min(senses(rng), rows - keys.size());
    for (std::size_t s = 0; s < k; ++s) keys.push_back({"w" + std::to_string(w), s});
    ++w;
  }
  std::shuffle(keys.begin(), keys.end(), rng);
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  return EmbeddingSet(std::move(keys), std::move(m));
}

// Sort every eligible row by (-cosine, row id), truncate to m.
inline std::vector<std::size_t> neighbor_oracle(const EmbeddingSet& set, std::size_t query, std::size_t m) {
  const auto q = row_vec(set, query);
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t r = 0; r < set.size(); ++r) {
    if (set.key(r).word == set.key(query).word) continue;
    all.emplace_back(-naive_cosine(q, row_vec(set, r)), r);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(m, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

// ---------------------------------------------------------------------------
// Graph oracles over an explicit edge list.

struct ToyGraph {
  std::vector<std::string> ids;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // child -> parent
};

inline std::optional<unsigned> bfs_distance(const ToyGraph& g, std::size_t from, std::size_t to) {
  std::vector<int> dist(g.ids.size(), -1);
  std::queue<std::size_t> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    const auto x = q.front();
    q.pop();
    if (x == to) return static_cast<unsigned>(dist[x]);
    for (const auto& [c, p] : g.edges) {
      if (c == x && dist[p] < 0) {
        dist[p] = dist[x] + 1;
        q.push(p);
      }
    }
  }
  return std::nullopt;
}

inline std::set<std::size_t> dfs_ancestors(const ToyGraph& g, std::size_t from) {
  std::set<std::size_t> seen;
  std::vector<std::size_t> stack{from};
  while (!stack.empty()) {
    const auto x = stack.back();
    stack.pop_back();
    for (const auto& [c, p] : g.edges) {
      if (c == x && seen.insert(p).second) stack.push_back(p);
    }
  }
  seen.erase(from);
  return seen;
}

// Random DAG: edges only go from lower to higher index, so no cycles.
inline ToyGraph random_dag(std::mt19937_64& rng, std::size_t n, double edge_prob) {
  ToyGraph g;
  for (std::size_t i = 0; i < n; ++i) g.ids.push_back("s" + std::to_string(i) + ".n.01");
  std::bernoulli_distribution coin(edge_prob);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) g.edges.emplace_back(i, j);
  return g;
}

inline LexicalGraph to_lexical(const ToyGraph& g, const std::map<std::string, std::vector<std::size_t>>& lemmas = {}) {
  std::vector<SynsetRecord> syn;
  for (std::size_t i = 0; i < g.ids.size(); ++i) {
    SynsetRecord r{g.ids[i], "n", {}};
    for (const auto& [w, ss] : lemmas)
      if (std::find(ss.begin(), ss.end(), i) != ss.end()) r.lemmas.push_back(w);
    syn.push_back(r);
  }
  std::vector<HypernymEdge> edges;
  for (const auto& [c, p] : g.edges) edges.push_back({g.ids[c], g.ids[p]});
  return LexicalGraph(syn, edges, {});
}

// Connected components by DFS over an adjacency list.
inline std::vector<PseudoGroup> dfs_components(const std::vector<PseudoPair>& pairs) {
  std::map<std::string, std::map<std::size_t, std::set<std::size_t>>> adj;
  for (const auto& p : pairs) {
    adj[p.word][p.a].insert(p.b);
    adj[p.word][p.b].insert(p.a);
  }
  std::vector<PseudoGroup> out;
  for (const auto& [word, g] : adj) {
    std::set<std::size_t> seen;
    std::vector<PseudoGroup> groups;
    for (const auto& [start, _] : g) {
      if (seen.count(start)) continue;
      PseudoGroup grp{word, {}};
      std::vector<std::size_t> stack{start};
      seen.insert(start);
      while (!stack.empty()) {
        const auto x = stack.back();
        stack.pop_back();
        grp.members.push_back(x);
        for (const auto y : g.at(x))
          if (seen.insert(y).second) stack.push_back(y);
      }
      std::sort(grp.members.begin(), grp.members.end());
      if (grp.members.size() >= 2) groups.push_back(grp);
    }
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.members.front() < b.members.front(); });
    out.insert(out.end(), groups.begin(), groups.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planted pseudo multi-sense fixture.
//
// Each (word, meaning) owns a private topic: a direction in embedding space,
// 12 single-sense context words clustered around it, three private domains
// and a two-level private hypernym chain. Meanings 2i and 2i+1 of a word form
// a family sharing a family domain and a family hypernym. All topics share the
// "factotum" domain and the object > physical_entity > entity chain.
//
// With n = 5 and 10 neighbors, two senses on the same topic score 2.0, senses
// on sibling topics score exactly 1.0 (not detected under the strict
// threshold), and senses on unrelated topics score 0.6.

struct PlantedFixture {
  EmbeddingSet set;
  std::vector<SynsetRecord> synsets;
  std::vector<HypernymEdge> edges;
  std::vector<DomainRecord> domains;
  std::vector<PseudoPair> planted_pairs;  // only word/a/b meaningful
  std::vector<PseudoGroup> planted_groups;
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> sibling_pairs;

  LexicalGraph graph() const { return LexicalGraph(synsets, edges, domains); }
};

inline const std::vector<std::vector<int>>& planted_layouts() {
  static const std::vector<std::vector<int>> layouts = {
      {0, 0},       {0, 1},       {0, 1, 0}, {0, 0, 0}, {0, 2},    {0, 1, 2},    {0, 0, 1, 1},
      {0, 2, 2},    {1, 0, 1},    {0, 1},    {0, 0},    {0, 2, 0, 2}, {0, 1, 2, 3}, {0, 0, 2},
      {0, 2, 1},    {0, 3, 3},    {0, 1, 1}, {0, 0},    {0, 2},    {0, 1, 0, 1}};
  return layouts;
}

inline constexpr std::size_t kPlantedContextPerTopic = 12;
inline constexpr std::size_t kPlantedDim = 48;

inline PlantedFixture make_planted_fixture(std::uint64_t seed = 7, double weight_scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&] {
    std::vector<double> v(kPlantedDim);
    double n = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      n += x * x;
    }
    for (auto& x : v) x /= std::sqrt(n);
    return v;
  };
  auto jitter = [&](const std::vector<double>& c) {
    std::vector<double> v(c);
    for (auto& x : v) x += 0.1 * normal(rng) / std::sqrt(static_cast<double>(kPlantedDim));
    return v;
  };

  PlantedFixture f;
  std::vector<std::pair<SenseKey, std::vector<double>>> rows;
  const auto add_synset = [&](const std::string& id, std::vector<std::string> lemmas) {
    f.synsets.push_back({id, "n", std::move(lemmas)});
  };
  add_synset("entity.n.01", {});
  add_synset("physical_entity.n.01", {});
  add_synset("object.n.01", {});
  f.edges.push_back({"physical_entity.n.01", "entity.n.01"});
  f.edges.push_back({"object.n.01", "physical_entity.n.01"});

  const auto& layouts = planted_layouts();
  std::size_t topic = 0;
  for (std::size_t wi = 0; wi < layouts.size(); ++wi) {
    const std::string word = "word" + std::to_string(wi);
    const auto& layout = layouts[wi];
    std::map<int, std::size_t> topic_of;
    std::map<int, std::vector<double>> center_of;
    std::vector<std::string> word_synsets;
    for (const int meaning : std::set<int>(layout.begin(), layout.end())) {
      const auto t = topic++;
      topic_of[meaning] = t;
      center_of[meaning] = random_unit();
      const auto T = std::to_string(t);
      const auto fam = std::to_string(wi) + "_" + std::to_string(meaning / 2);
      const std::string fam_syn = "fam" + fam + ".n.01";
      if (std::none_of(f.synsets.begin(), f.synsets.end(), [&](const auto& s) { return s.id == fam_syn; })) {
        add_synset(fam_syn, {});
        f.edges.push_back({fam_syn, "object.n.01"});
      }
      add_synset("h" + T + "_1.n.01", {});
      add_synset("h" + T + "_0.n.01", {});
      f.edges.push_back({"h" + T + "_1.n.01", fam_syn});
      f.edges.push_back({"h" + T + "_0.n.01", "h" + T + "_1.n.01"});

      const std::string own = word + ".m" + std::to_string(meaning) + ".n.01";
      add_synset(own, {word});
      f.edges.push_back({own, "h" + T + "_0.n.01"});

      for (std::size_t j = 0; j < kPlantedContextPerTopic; ++j) {
        const std::string ctx = "c" + T + "_" + std::to_string(j);
        const std::string syn = ctx + ".n.01";
        add_synset(syn, {ctx});
        f.edges.push_back({syn, "h" + T + "_0.n.01"});
        f.domains.push_back({syn, "t" + T + "_d0", 0.9 * weight_scale});
        f.domains.push_back({syn, "t" + T + "_d1", 0.8 * weight_scale});
        f.domains.push_back({syn, "t" + T + "_d2", 0.7 * weight_scale});
        f.domains.push_back({syn, "fam" + fam, 0.6 * weight_scale});
        f.domains.push_back({syn, "factotum", 0.5 * weight_scale});
        rows.push_back({{ctx, 0}, jitter(center_of[meaning])});
      }
    }
    for (std::size_t k = 0; k < layout.size(); ++k) {
      rows.push_back({{word, k}, jitter(center_of[layout[k]])});
    }
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t k = 0; k < layout.size(); ++k) {
      for (std::size_t l = k + 1; l < layout.size(); ++l) {
        if (layout[k] == layout[l]) {
          f.planted_pairs.push_back({word, k, l, 1.0, 1.0, 2.0});
        } else if (layout[k] / 2 == layout[l] / 2) {
          f.sibling_pairs.push_back({word, {k, l}});
        }
      }
    }
    std::map<int, std::vector<std::size_t>> by_meaning;
    for (std::size_t k = 0; k < layout.size(); ++k) by_meaning[layout[k]].push_back(k);
    std::vector<PseudoGroup> groups;
    for (auto& [m, members] : by_meaning)
      if (members.size() >= 2) groups.push_back({word, members});
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.members.front() < b.members.front(); });
    f.planted_groups.insert(f.planted_groups.end(), groups.begin(), groups.end());
  }
  // The library reports words in lexicographic order.
  std::sort(f.planted_pairs.begin(), f.planted_pairs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.word, a.a, a.b) < std::tie(b.word, b.a, b.b);
  });
  std::stable_sort(f.planted_groups.begin(), f.planted_groups.end(),
                   [](const auto& a, const auto& b) { return a.word < b.word; });

  std::vector<SenseKey> keys;
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kPlantedDim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    keys.push_back(rows[i].first);
    for (std::size_t j = 0; j < kPlantedDim; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].second[j];
  }
  f.set = EmbeddingSet(std::move(keys), std::move(m));
  return f;
}

inline void write_graph_files(const PlantedFixture& f, const std::filesystem::path& dir) {
  std::ofstream syn(dir / "synsets.tsv"), hyp(dir / "hypernyms.tsv"), dom(dir / "domains.tsv");
  for (const auto& s : f.synsets) {
    syn << s.id << '\t' << s.pos << '\t';
    for (std::size_t i = 0; i < s.lemmas.size(); ++i) syn << (i ? "," : "") << s.lemmas[i];
    syn << '\n';
  }
  for (const auto& e : f.edges) hyp << e.child << '\t' << e.parent << '\n';
  for (const auto& d : f.domains) dom << d.synset << '\t' << d.domain << '\t' << detail::format_double(d.weight) << '\n';
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("psense_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---------------------------------------------------------------------------
// Analogy oracle: enumerate every sense combination and every candidate row
// with naive cosine.

inline bool analogy_direction_oracle(const EmbeddingSet& set, const std::string& a, const std::string& b,
                                     const std::string& c, const std::string& target) {
  auto senses = [&](const std::string& w) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < set.size(); ++r)
      if (set.key(r).word == w) rows.push_back(r);
    return rows;
  };
  const auto ra = senses(a), rb = senses(b), rc = senses(c), rt = senses(target);
  for (const auto ia : ra)
    for (const auto ib : rb)
      for (const auto ic : rc)
        for (const auto it : rt) {
          const auto va = row_vec(set, ia), vb = row_vec(set, ib), vc = row_vec(set, ic);
          std::vector<double> q(va.size());
          for (std::size_t j = 0; j < q.size(); ++j) q[j] = va[j] - vb[j] + vc[j];
          double best = -2.0;
          std::size_t best_row = set.size();
          for (std::size_t r = 0; r < set.size(); ++r) {
            const auto& w = set.key(r).word;
            if (w == a || w == b || w == c) continue;
            const double s = naive_cosine(q, row_vec(set, r));
            if (s > best) {
              best = s;
              best_row = r;
            }
          }
          if (best_row == it) return true;
        }
  return false;
}

inline bool quadruple_oracle(const EmbeddingSet& set, const Quadruple& q) {
  // v1 - v2 = v3 - v4, each word predicted from the other three.
  return analogy_direction_oracle(set, q.w2, q.w1, q.w3, q.w4) ||
         analogy_direction_oracle(set, q.w2, q.w4, q.w3, q.w1) ||
         analogy_direction_oracle(set, q.w1, q.w3, q.w4, q.w2) ||
         analogy_direction_oracle(set, q.w1, q.w2, q.w4, q.w3);
}

// Single-sense space where every quadruple (a_i, b_i, a_j, b_j) satisfies
// a_i - b_i = a_j - b_j exactly; b_i = a_i - r for a relation offset r.
struct OffsetSpace {
  EmbeddingSet set;
  std::vector<Quadruple> quads;
};

inline OffsetSpace make_offset_space(std::uint64_t seed, std::size_t pairs = 6, std::size_t dim = 40,
                                     std::size_t distractors = 30) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto rand_vec = [&] {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    return v;
  };
  const auto offset = rand_vec();
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  for (std::size_t i = 0; i < pairs; ++i) {
    auto a = rand_vec();
    std::vector<double> b(dim);
    for (std::size_t j = 0; j < dim; ++j) b[j] = a[j] - 0.5 * offset[j];
    rows.push_back({"a" + std::to_string(i), a});
    rows.push_back({"b" + std::to_string(i), b});
  }
  for (std::size_t i = 0; i < distractors; ++i) rows.push_back({"x" + std::to_string(i), rand_vec()});
  std::vector<SenseKey> keys;
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    keys.push_back({rows[i].first, 0});
    for (std::size_t j = 0; j < dim; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].second[j];
  }
  OffsetSpace out{EmbeddingSet(std::move(keys), std::move(m)), {}};
  for (std::size_t i = 0; i < pairs; ++i)
    for (std::size_t j = 0; j < pairs; ++j)
      if (i != j) {
        out.quads.push_back({"a" + std::to_string(i), "b" + std::to_string(i), "a" + std::to_string(j),
                             "b" + std::to_string(j), i % 2 ? "gram1-test" : "family",
                             i % 2 ? AnalogySection::kSyntactic : AnalogySection::kSemantic});
      }
  return out;
}

// Random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace psense::testing
