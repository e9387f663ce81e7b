#pragma once

// Pseudo multi-sense detection.
//
// Each sense gets two label profiles built from its nearest neighbors: a
// domain profile (summed domain weights of the neighbors' lemmas) and a
// hypernym profile (neighbor hypernym frequencies discounted by distance on
// both sides). Two senses of one word are compared through the overlap of
// their top-n labels in each profile; a pair whose combined overlap exceeds
// the threshold is reported, and pairs are closed transitively into groups.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psense/detail/parallel.hpp"
#include "psense/detail/text.hpp"
#include "psense/detail/union_find.hpp"
#include "psense/embedding_store.hpp"
#include "psense/errors.hpp"
#include "psense/lexical_graph.hpp"

namespace psense {

inline constexpr std::size_t kDefaultTopN = 5;
inline constexpr double kDefaultThreshold = 1.0;

enum class ProfileKind { kDomain, kHypernym };

// Label -> non-negative score. Only strictly positive scores are stored.
struct ScoreProfile {
  SenseKey subject;
  ProfileKind kind = ProfileKind::kDomain;
  std::map<std::string, double> scores;

  bool empty() const noexcept { return scores.empty(); }
};

struct SenseSimilarity {
  double domain = 0.0;
  double hypernym = 0.0;
  double total = 0.0;
};

struct PseudoPair {
  std::string word;
  std::size_t a = 0;
  std::size_t b = 0;
  double sim_domain = 0.0;
  double sim_hypernym = 0.0;
  double sim_total = 0.0;

  bool operator==(const PseudoPair&) const = default;
};

struct PseudoGroup {
  std::string word;
  std::vector<std::size_t> members;  // ascending

  bool operator==(const PseudoGroup&) const = default;
};

struct DetectorConfig {
  std::size_t top_n = kDefaultTopN;
  double threshold = kDefaultThreshold;
  std::size_t neighbors = kDefaultNeighborCount;
  unsigned threads = 0;
};

namespace detail {

inline ScoreProfile domain_profile_from(const LexicalGraph& g, const NeighborList& nn) {
  ScoreProfile p{nn.query, ProfileKind::kDomain, {}};
  std::map<std::size_t, double> sums;
  for (const auto& n : nn.neighbors) {
    for (const auto s : g.synsets_of(n.key.word)) {
      for (const auto& [dom, w] : g.domain_weights(s)) sums[dom] += w;
    }
  }
  for (const auto& [dom, total] : sums) {
    if (total > 0.0) p.scores.emplace(g.domain_label(dom), total);
  }
  return p;
}

// h -> (H(word, h), d(word, h)) for every strict ancestor h of word's synsets.
inline std::map<std::size_t, std::pair<std::size_t, unsigned>> hypernym_stats(const LexicalGraph& g,
                                                                             std::string_view word) {
  std::map<std::size_t, std::pair<std::size_t, unsigned>> stats;
  const auto synsets = g.synsets_of(word);
  for (const auto s : synsets) {
    for (const auto& a : g.ancestors(s)) {
      auto [it, inserted] = stats.emplace(a.synset, std::pair<std::size_t, unsigned>{1, a.distance});
      if (!inserted) {
        ++it->second.first;
        it->second.second = std::min(it->second.second, a.distance);
      }
    }
  }
  // h may also be one of the word's own synsets: distance 0, clamped to 1.
  for (auto& [h, st] : stats) {
    if (std::find(synsets.begin(), synsets.end(), h) != synsets.end()) st.second = 0;
    st.second = std::max(st.second, 1u);
  }
  return stats;
}

inline ScoreProfile hypernym_profile_from(const LexicalGraph& g, const NeighborList& nn) {
  ScoreProfile p{nn.query, ProfileKind::kHypernym, {}};
  const auto candidates = hypernym_stats(g, nn.query.word);
  if (candidates.empty()) return p;
  std::map<std::size_t, double> inner;
  for (const auto& n : nn.neighbors) {
    for (const auto& [h, st] : hypernym_stats(g, n.key.word)) {
      if (candidates.count(h) == 0) continue;
      inner[h] += static_cast<double>(st.first) / static_cast<double>(st.second);
    }
  }
  for (const auto& [h, sum] : inner) {
    const auto dq = candidates.at(h).second;
    const double score = sum / static_cast<double>(dq);
    if (score > 0.0) p.scores.emplace(g.synset_id(h), score);
  }
  return p;
}

struct SenseProfiles {
  ScoreProfile domain;
  ScoreProfile hypernym;
};

inline SenseProfiles profiles_for(const EmbeddingSet& set, const LexicalGraph& g, const SenseKey& q,
                                  std::size_t m) {
  const auto nn = nearest_neighbors(set, q, m);
  return {domain_profile_from(g, nn), hypernym_profile_from(g, nn)};
}

inline std::size_t overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t count = 0;
  for (const auto& label : a) {
    if (std::find(b.begin(), b.end(), label) != b.end()) ++count;
  }
  return count;
}

}  // namespace detail

// Unnormalized domain scores of q from its m nearest neighbors.
inline ScoreProfile domain_profile(const EmbeddingSet& set, const LexicalGraph& g, const SenseKey& q,
                                   std::size_t m = kDefaultNeighborCount) {
  return detail::domain_profile_from(g, nearest_neighbors(set, q, m));
}

// Unnormalized hypernym scores of q. Labels that are not hypernyms of q's
// word never appear.
inline ScoreProfile hypernym_profile(const EmbeddingSet& set, const LexicalGraph& g, const SenseKey& q,
                                     std::size_t m = kDefaultNeighborCount) {
  return detail::hypernym_profile_from(g, nearest_neighbors(set, q, m));
}

// The n highest-scoring labels; equal scores resolve lexicographically.
inline std::vector<std::string> top_n(const ScoreProfile& p, std::size_t n) {
  if (n == 0) throw InvalidArgumentError("top_n: n must be >= 1");
  std::vector<std::pair<std::string, double>> entries(p.scores.begin(), p.scores.end());
  const auto take = std::min(n, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(take), entries.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(std::move(entries[i].first));
  return out;
}

// Number of shared top-n labels; sim_component divides it by n.
inline std::size_t shared_top_n(const ScoreProfile& p1, const ScoreProfile& p2, std::size_t n) {
  if (p1.kind != p2.kind) throw InvalidArgumentError("sim_component: profile kinds differ");
  return detail::overlap(top_n(p1, n), top_n(p2, n));
}

inline double sim_component(const ScoreProfile& p1, const ScoreProfile& p2, std::size_t n) {
  return static_cast<double>(shared_top_n(p1, p2, n)) / static_cast<double>(n);
}

namespace detail {

inline SenseSimilarity combine(const SenseProfiles& k, const SenseProfiles& l, std::size_t n) {
  const auto cd = shared_top_n(k.domain, l.domain, n);
  const auto ch = shared_top_n(k.hypernym, l.hypernym, n);
  const auto dn = static_cast<double>(n);
  // The total comes from the integer count so that e.g. 2/5 + 3/5 is exactly 1.
  return {static_cast<double>(cd) / dn, static_cast<double>(ch) / dn, static_cast<double>(cd + ch) / dn};
}

}  // namespace detail

inline SenseSimilarity sense_similarity(const EmbeddingSet& set, const LexicalGraph& g, std::string_view word,
                                        std::size_t k, std::size_t l, std::size_t n = kDefaultTopN,
                                        std::size_t m = kDefaultNeighborCount) {
  if (k == l) throw InvalidArgumentError("sense_similarity: senses must differ");
  const SenseKey qk{std::string(word), k};
  const SenseKey ql{std::string(word), l};
  set.row_of(qk);
  set.row_of(ql);
  if (n == 0) throw InvalidArgumentError("sense_similarity: n must be >= 1");
  return detail::combine(detail::profiles_for(set, g, qk, m), detail::profiles_for(set, g, ql, m), n);
}

// Every pair (k < l) of senses of one word whose similarity exceeds the
// threshold, ordered by (word, k, l).
inline std::vector<PseudoPair> detect_pairs(const EmbeddingSet& set, const LexicalGraph& g,
                                            const DetectorConfig& cfg = {}) {
  if (!(cfg.threshold >= 0.0)) throw InvalidArgumentError("detect_pairs: threshold must be >= 0");
  if (cfg.top_n == 0) throw InvalidArgumentError("detect_pairs: n must be >= 1");
  std::vector<const std::string*> words;
  for (const auto& w : set.words()) {
    if (set.sense_count(w) >= 2) words.push_back(&w);
  }
  std::vector<std::vector<PseudoPair>> per_word(words.size());
  detail::parallel_for(
      words.size(),
      [&](std::size_t i) {
        const auto& word = *words[i];
        const auto k_count = set.sense_count(word);
        std::vector<detail::SenseProfiles> profiles;
        profiles.reserve(k_count);
        for (std::size_t k = 0; k < k_count; ++k) {
          profiles.push_back(detail::profiles_for(set, g, {word, k}, cfg.neighbors));
        }
        for (std::size_t k = 0; k < k_count; ++k) {
          for (std::size_t l = k + 1; l < k_count; ++l) {
            const auto sim = detail::combine(profiles[k], profiles[l], cfg.top_n);
            if (sim.total > cfg.threshold) {
              per_word[i].push_back({word, k, l, sim.domain, sim.hypernym, sim.total});
            }
          }
        }
      },
      cfg.threads);
  std::vector<PseudoPair> out;
  for (auto& v : per_word) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline std::vector<PseudoPair> detect_pairs(const EmbeddingSet& set, const LexicalGraph& g, double threshold,
                                            std::size_t n = kDefaultTopN, std::size_t m = kDefaultNeighborCount) {
  return detect_pairs(set, g, DetectorConfig{n, threshold, m, 0});
}

// Connected components of each word's pair graph; singletons are dropped.
// Output is sorted by (word, smallest member).
inline std::vector<PseudoGroup> build_groups(const std::vector<PseudoPair>& pairs) {
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> by_word;
  for (const auto& p : pairs) {
    if (p.a == p.b) throw InvalidArgumentError("build_groups: self pair for " + p.word);
    by_word[p.word].emplace_back(p.a, p.b);
  }
  std::vector<PseudoGroup> out;
  for (const auto& [word, edges] : by_word) {
    std::size_t n = 0;
    for (const auto& [a, b] : edges) n = std::max({n, a + 1, b + 1});
    detail::UnionFind uf(n);
    std::vector<bool> touched(n, false);
    for (const auto& [a, b] : edges) {
      uf.unite(a, b);
      touched[a] = touched[b] = true;
    }
    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t s = 0; s < n; ++s) {
      if (touched[s]) components[uf.find(s)].push_back(s);
    }
    std::vector<PseudoGroup> groups;
    for (auto& [root, members] : components) {
      if (members.size() >= 2) groups.push_back({word, std::move(members)});
    }
    std::sort(groups.begin(), groups.end(),
              [](const PseudoGroup& x, const PseudoGroup& y) { return x.members.front() < y.members.front(); });
    out.insert(out.end(), groups.begin(), groups.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report files

inline void write_pairs_tsv(std::ostream& out, const std::vector<PseudoPair>& pairs) {
  for (const auto& p : pairs) {
    out << p.word << '\t' << p.a << '\t' << p.b << '\t' << detail::format_double(p.sim_domain) << '\t'
        << detail::format_double(p.sim_hypernym) << '\t' << detail::format_double(p.sim_total) << '\n';
  }
}

inline void write_groups_tsv(std::ostream& out, const std::vector<PseudoGroup>& groups) {
  for (const auto& g : groups) {
    out << g.word << '\t';
    for (std::size_t i = 0; i < g.members.size(); ++i) out << (i ? "," : "") << g.members[i];
    out << '\n';
  }
}

inline std::vector<PseudoGroup> read_groups_tsv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<PseudoGroup> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto f = detail::split(lines[i], '\t');
    if (f.size() != 2 || f[0].empty()) throw ParseError(path, i + 1, "expected <word>\\t<k1,k2,...>");
    PseudoGroup g{std::string(f[0]), {}};
    for (const auto tok : detail::split(f[1], ',')) {
      const auto k = detail::parse_int<std::size_t>(detail::trim(tok));
      if (!k) throw ParseError(path, i + 1, "malformed sense index '" + std::string(tok) + "'");
      g.members.push_back(*k);
    }
    std::sort(g.members.begin(), g.members.end());
    if (std::adjacent_find(g.members.begin(), g.members.end()) != g.members.end()) {
      throw ParseError(path, i + 1, "repeated sense index in group");
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace psense
