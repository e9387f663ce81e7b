#pragma once

// Synset inventory, hypernym DAG and per-synset domain weights.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psense/detail/text.hpp"
#include "psense/errors.hpp"

namespace psense {

struct SynsetRecord {
  std::string id;
  std::string pos;
  std::vector<std::string> lemmas;
};

struct HypernymEdge {
  std::string child;
  std::string parent;
};

struct DomainRecord {
  std::string synset;
  std::string domain;
  double weight = 0.0;
};

// Strict ancestor of a synset together with its shortest directed distance.
struct Ancestor {
  std::size_t synset;
  unsigned distance;
};

class LexicalGraph {
 public:
  LexicalGraph() = default;

  LexicalGraph(std::vector<SynsetRecord> synsets, const std::vector<HypernymEdge>& edges,
               const std::vector<DomainRecord>& domains) {
    ids_.reserve(synsets.size());
    pos_.reserve(synsets.size());
    for (auto& s : synsets) {
      if (s.id.empty()) throw InvalidGraphError("empty synset id");
      const auto idx = ids_.size();
      if (!index_.emplace(s.id, idx).second) throw DuplicateKeyError("duplicate synset id " + s.id);
      ids_.push_back(std::move(s.id));
      pos_.push_back(std::move(s.pos));
      for (auto& lemma : s.lemmas) {
        if (lemma.empty()) continue;
        auto& list = lemma_index_[std::move(lemma)];
        if (std::find(list.begin(), list.end(), idx) == list.end()) list.push_back(idx);
      }
    }

    parents_.assign(ids_.size(), {});
    for (const auto& e : edges) {
      const auto c = find_synset(e.child);
      const auto p = find_synset(e.parent);
      if (!c) throw ReferentialIntegrityError("hypernym edge references undeclared synset " + e.child);
      if (!p) throw ReferentialIntegrityError("hypernym edge references undeclared synset " + e.parent);
      auto& list = parents_[*c];
      if (std::find(list.begin(), list.end(), *p) == list.end()) list.push_back(*p);
    }
    for (auto& list : parents_) std::sort(list.begin(), list.end());

    domain_weights_.assign(ids_.size(), {});
    for (const auto& d : domains) {
      const auto s = find_synset(d.synset);
      if (!s) throw ReferentialIntegrityError("domain row references undeclared synset " + d.synset);
      if (d.domain.empty()) throw InvalidGraphError("empty domain label for synset " + d.synset);
      if (!(d.weight >= 0.0)) throw InvalidGraphError("negative domain weight for " + d.synset + "/" + d.domain);
      const auto [it, inserted] = domain_index_.emplace(d.domain, domain_labels_.size());
      if (inserted) domain_labels_.push_back(d.domain);
      auto& list = domain_weights_[*s];
      for (const auto& [dom, w] : list) {
        if (dom == it->second) throw DuplicateKeyError("duplicate domain row " + d.synset + "/" + d.domain);
      }
      list.emplace_back(it->second, d.weight);
    }

    compute_ancestors();
  }

  std::size_t synset_count() const noexcept { return ids_.size(); }
  std::size_t domain_count() const noexcept { return domain_labels_.size(); }
  const std::vector<std::string>& domain_labels() const noexcept { return domain_labels_; }
  const std::string& synset_id(std::size_t i) const { return ids_.at(i); }
  const std::string& synset_pos(std::size_t i) const { return pos_.at(i); }
  const std::string& domain_label(std::size_t i) const { return domain_labels_.at(i); }

  std::optional<std::size_t> find_synset(std::string_view id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_synset(std::string_view id) const {
    const auto s = find_synset(id);
    if (!s) throw KeyNotFoundError("unknown synset " + std::string(id));
    return *s;
  }

  std::optional<std::size_t> find_domain(std::string_view label) const {
    const auto it = domain_index_.find(label);
    if (it == domain_index_.end()) return std::nullopt;
    return it->second;
  }

  // Synsets(word), in declaration order; empty if unknown.
  std::span<const std::size_t> synsets_of(std::string_view word) const {
    const auto it = lemma_index_.find(word);
    if (it == lemma_index_.end()) return {};
    return it->second;
  }

  std::span<const std::size_t> parents(std::size_t s) const { return parents_.at(s); }

  // Strict ancestors, sorted by synset index.
  std::span<const Ancestor> ancestors(std::size_t s) const { return ancestors_.at(s); }

  std::span<const std::pair<std::size_t, double>> domain_weights(std::size_t s) const {
    return domain_weights_.at(s);
  }

  // Shortest directed hypernym path length from x up to y.
  std::optional<unsigned> distance(std::size_t x, std::size_t y) const {
    if (x == y) return 0u;
    const auto& anc = ancestors_.at(x);
    const auto it = std::lower_bound(anc.begin(), anc.end(), y,
                                     [](const Ancestor& a, std::size_t v) { return a.synset < v; });
    if (it == anc.end() || it->synset != y) return std::nullopt;
    return it->distance;
  }

 private:
  void compute_ancestors() {
    const auto n = ids_.size();
    // Iterative DFS post-order over parent edges: parents finish before children.
    enum class Mark : unsigned char { kWhite, kGrey, kBlack };
    std::vector<Mark> mark(n, Mark::kWhite);
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (std::size_t root = 0; root < n; ++root) {
      if (mark[root] != Mark::kWhite) continue;
      stack.emplace_back(root, 0);
      mark[root] = Mark::kGrey;
      while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < parents_[node].size()) {
          const auto p = parents_[node][next++];
          if (mark[p] == Mark::kGrey) {
            throw InvalidGraphError("hypernym cycle through edge " + ids_[node] + " -> " + ids_[p]);
          }
          if (mark[p] == Mark::kWhite) {
            mark[p] = Mark::kGrey;
            stack.emplace_back(p, 0);
          }
        } else {
          mark[node] = Mark::kBlack;
          order.push_back(node);
          stack.pop_back();
        }
      }
    }

    ancestors_.assign(n, {});
    std::map<std::size_t, unsigned> merged;
    for (const auto s : order) {
      merged.clear();
      for (const auto p : parents_[s]) {
        auto [it, inserted] = merged.emplace(p, 1u);
        if (!inserted) it->second = 1u;
        for (const auto& a : ancestors_[p]) {
          auto [jt, ins] = merged.emplace(a.synset, a.distance + 1);
          if (!ins) jt->second = std::min(jt->second, a.distance + 1);
        }
      }
      auto& out = ancestors_[s];
      out.reserve(merged.size());
      for (const auto& [a, d] : merged) out.push_back({a, d});
    }
  }

  std::vector<std::string> ids_;
  std::vector<std::string> pos_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> lemma_index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<Ancestor>> ancestors_;
  std::vector<std::string> domain_labels_;
  std::map<std::string, std::size_t, std::less<>> domain_index_;
  std::vector<std::vector<std::pair<std::size_t, double>>> domain_weights_;
};

// ---------------------------------------------------------------------------
// TSV ingestion

inline std::vector<SynsetRecord> read_synsets_tsv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<SynsetRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto f = detail::split(lines[i], '\t');
    if (f.size() != 3) throw ParseError(path, i + 1, "expected <synset_id>\\t<pos>\\t<lemmas>");
    SynsetRecord rec{std::string(f[0]), std::string(f[1]), {}};
    if (rec.id.empty()) throw ParseError(path, i + 1, "empty synset id");
    for (const auto lemma : detail::split(f[2], ',')) {
      if (!lemma.empty()) rec.lemmas.emplace_back(lemma);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<HypernymEdge> read_hypernyms_tsv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<HypernymEdge> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto f = detail::split(lines[i], '\t');
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ParseError(path, i + 1, "expected <child_synset_id>\\t<parent_synset_id>");
    }
    out.push_back({std::string(f[0]), std::string(f[1])});
  }
  return out;
}

inline std::vector<DomainRecord> read_domains_tsv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<DomainRecord> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const auto f = detail::split(lines[i], '\t');
    if (f.size() != 3) throw ParseError(path, i + 1, "expected <synset_id>\\t<domain_label>\\t<weight>");
    const auto w = detail::parse_double(f[2]);
    if (!w || !std::isfinite(*w)) throw ParseError(path, i + 1, "malformed weight '" + std::string(f[2]) + "'");
    if (*w < 0.0) throw ParseError(path, i + 1, "negative weight");
    out.push_back({std::string(f[0]), std::string(f[1]), *w});
  }
  return out;
}

inline LexicalGraph load_graph(const std::string& synsets_path, const std::string& hypernyms_path,
                               const std::string& domains_path) {
  return LexicalGraph(read_synsets_tsv(synsets_path), read_hypernyms_tsv(hypernyms_path),
                      read_domains_tsv(domains_path));
}

// ---------------------------------------------------------------------------
// Queries

// D(word, d): summed weight of domain d over every synset of word.
inline double domain_mass(const LexicalGraph& g, std::string_view word, std::string_view domain) {
  const auto d = g.find_domain(domain);
  if (!d) return 0.0;
  double total = 0.0;
  for (const auto s : g.synsets_of(word)) {
    for (const auto& [dom, w] : g.domain_weights(s)) {
      if (dom == *d) total += w;
    }
  }
  return total;
}

inline std::optional<unsigned> synset_distance(const LexicalGraph& g, std::string_view x, std::string_view y) {
  return g.distance(g.require_synset(x), g.require_synset(y));
}

// d(word, h) over synset indices; zero distance is clamped to 1.
inline std::optional<unsigned> lemma_hypernym_distance(const LexicalGraph& g, std::string_view word, std::size_t h) {
  std::optional<unsigned> best;
  for (const auto s : g.synsets_of(word)) {
    const auto d = g.distance(s, h);
    if (d && (!best || *d < *best)) best = d;
  }
  if (best && *best == 0) best = 1u;
  return best;
}

inline std::optional<unsigned> lemma_hypernym_distance(const LexicalGraph& g, std::string_view word,
                                                       std::string_view h) {
  return lemma_hypernym_distance(g, word, g.require_synset(h));
}

// H(word, h): number of synsets of word that have h as a strict transitive ancestor.
inline std::size_t hypernym_frequency(const LexicalGraph& g, std::string_view word, std::size_t h) {
  std::size_t count = 0;
  for (const auto s : g.synsets_of(word)) {
    if (s != h && g.distance(s, h)) ++count;
  }
  return count;
}

inline std::size_t hypernym_frequency(const LexicalGraph& g, std::string_view word, std::string_view h) {
  return hypernym_frequency(g, word, g.require_synset(h));
}

}  // namespace psense
