#pragma once

// End-to-end stages behind the psense command line tool. Stages talk to each
// other only through files in the output directory:
//
//   detect         -> pairs.tsv, groups.tsv, detect_report.json
//   train-project  -> phi.txt, projected.txt, train_report.json
//   eval           -> eval_report.json
//
// Each report is deterministic given its inputs and config; wall-clock timings
// go to a separate <stage>_timings.json so reports can be compared byte for
// byte.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "psense/detector.hpp"
#include "psense/embedding_store.hpp"
#include "psense/errors.hpp"
#include "psense/eval_analogy.hpp"
#include "psense/eval_similarity.hpp"
#include "psense/lexical_graph.hpp"
#include "psense/projector.hpp"

namespace psense {

enum class SpaceSelector { kOriginal, kProjected, kBoth };

struct RunConfig {
  std::string embeddings;
  std::string synsets;
  std::string hypernyms;
  std::string domains;
  std::string wordsim;
  std::string scws;
  std::string analogy;
  std::string groups;     // default: <out_dir>/groups.tsv
  std::string projected;  // default: <out_dir>/projected.txt
  std::string out_dir = ".";

  std::size_t top_n = kDefaultTopN;
  double lambda = kDefaultThreshold;
  std::size_t neighbors = kDefaultNeighborCount;
  RepresentativeMode rep = RepresentativeMode::kMean;
  double lr = 0.01;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  double tau = kDefaultTemperature;
  std::size_t window = kDefaultWindow;
  SpaceSelector space = SpaceSelector::kBoth;
  unsigned threads = 0;

  std::filesystem::path out_path(const std::string& name) const { return std::filesystem::path(out_dir) / name; }
  std::string groups_path() const { return groups.empty() ? out_path("groups.tsv").string() : groups; }
  std::string projected_path() const { return projected.empty() ? out_path("projected.txt").string() : projected; }
};

inline const char* to_string(RepresentativeMode m) { return m == RepresentativeMode::kMean ? "mean" : "random"; }

inline const char* to_string(SpaceSelector s) {
  switch (s) {
    case SpaceSelector::kOriginal:
      return "original";
    case SpaceSelector::kProjected:
      return "projected";
    case SpaceSelector::kBoth:
      return "both";
  }
  return "both";
}

// Every field needed to rerun a stage. Thread count is omitted: it never
// changes results.
inline nlohmann::ordered_json config_echo(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["embeddings"] = c.embeddings;
  j["synsets"] = c.synsets;
  j["hypernyms"] = c.hypernyms;
  j["domains"] = c.domains;
  j["wordsim"] = c.wordsim;
  j["scws"] = c.scws;
  j["analogy"] = c.analogy;
  j["groups"] = c.groups_path();
  j["projected"] = c.projected_path();
  j["out_dir"] = c.out_dir;
  j["top_n"] = c.top_n;
  j["lambda"] = c.lambda;
  j["neighbors"] = c.neighbors;
  j["rep"] = to_string(c.rep);
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["tau"] = c.tau;
  j["window"] = c.window;
  j["space"] = to_string(c.space);
  return j;
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline nlohmann::ordered_json nullable(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline nlohmann::ordered_json nullable(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
}

inline LexicalGraph load_graph_from(const RunConfig& c) {
  if (c.synsets.empty() || c.hypernyms.empty() || c.domains.empty()) {
    throw InvalidArgumentError("--synsets, --hypernyms and --domains are required");
  }
  return load_graph(c.synsets, c.hypernyms, c.domains);
}

inline EmbeddingSet load_embeddings_from(const RunConfig& c) {
  if (c.embeddings.empty()) throw InvalidArgumentError("--embeddings is required");
  return load_embeddings(c.embeddings);
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct DetectSummary {
  std::vector<PseudoPair> pairs;
  std::vector<PseudoGroup> groups;
};

inline DetectSummary run_detect(const RunConfig& c, std::ostream& log) {
  detail::Stopwatch total;
  const auto set = detail::load_embeddings_from(c);
  const auto graph = detail::load_graph_from(c);
  const double load_s = total.seconds();

  detail::Stopwatch detect_clock;
  DetectSummary s;
  s.pairs = detect_pairs(set, graph, DetectorConfig{c.top_n, c.lambda, c.neighbors, c.threads});
  s.groups = build_groups(s.pairs);
  const double detect_s = detect_clock.seconds();

  detail::ensure_dir(c.out_dir);
  std::ostringstream pairs_tsv, groups_tsv;
  write_pairs_tsv(pairs_tsv, s.pairs);
  write_groups_tsv(groups_tsv, s.groups);
  detail::write_text_file(c.out_path("pairs.tsv"), pairs_tsv.str());
  detail::write_text_file(c.out_path("groups.tsv"), groups_tsv.str());

  std::size_t multi_sense_words = 0;
  for (const auto& w : set.words()) multi_sense_words += set.sense_count(w) >= 2 ? 1 : 0;
  std::size_t grouped_senses = 0;
  for (const auto& g : s.groups) grouped_senses += g.members.size();

  nlohmann::ordered_json report;
  report["command"] = "detect";
  report["config"] = config_echo(c);
  report["embeddings"] = {{"rows", set.size()}, {"dim", set.dim()}, {"words", set.words().size()},
                          {"multi_sense_words", multi_sense_words}};
  report["graph"] = {{"synsets", graph.synset_count()}, {"domains", graph.domain_count()}};
  report["detection"] = {{"pairs", s.pairs.size()}, {"groups", s.groups.size()}, {"grouped_senses", grouped_senses}};
  detail::write_json(c.out_path("detect_report.json"), report);
  detail::write_json(c.out_path("detect_timings.json"),
                     {{"load_seconds", load_s}, {"detect_seconds", detect_s}, {"total_seconds", total.seconds()}});

  log << "detect: " << set.size() << " senses, " << multi_sense_words << " multi-sense words, " << s.pairs.size()
      << " pairs, " << s.groups.size() << " groups -> " << c.out_dir << "\n";
  return s;
}

// ---------------------------------------------------------------------------

struct TrainSummary {
  TrainingResult training;
  std::size_t groups = 0;
  std::size_t pairs = 0;
  std::vector<std::size_t> zero_rows;
};

inline TrainSummary run_train_project(const RunConfig& c, std::ostream& log) {
  detail::Stopwatch total;
  const auto set = detail::load_embeddings_from(c);
  const auto groups = read_groups_tsv(c.groups_path());
  for (const auto& g : groups) {
    for (const auto k : g.members) {
      if (!set.find({g.word, k})) {
        throw KeyNotFoundError("groups file references unknown sense " + SenseKey{g.word, k}.to_string());
      }
    }
  }

  detail::Stopwatch train_clock;
  const auto reps = make_representatives(set, groups, c.rep, c.seed);
  const auto pairs = training_pairs(set, reps);
  TrainingConfig tc;
  tc.learning_rate = c.lr;
  tc.epochs = c.epochs;
  tc.seed = c.seed;
  TrainSummary s;
  s.training = train_transition(pairs, tc, set.dim());
  s.groups = groups.size();
  s.pairs = pairs.size();
  const double train_s = train_clock.seconds();

  detail::Stopwatch project_clock;
  const auto projected = project_space(set, s.training.phi, c.threads);
  s.zero_rows = projected.zero_rows();
  const double project_s = project_clock.seconds();

  detail::ensure_dir(c.out_dir);
  save_transition(s.training.phi, c.out_path("phi.txt").string());
  save_embeddings(projected, c.projected_path());

  nlohmann::ordered_json report;
  report["command"] = "train-project";
  report["config"] = config_echo(c);
  report["groups"] = s.groups;
  report["training_pairs"] = s.pairs;
  report["loss_curve"] = s.training.loss_curve;
  auto zero = nlohmann::ordered_json::array();
  for (const auto r : s.zero_rows) zero.push_back(set.key(r).to_string());
  report["zero_rows"] = zero;
  detail::write_json(c.out_path("train_report.json"), report);
  detail::write_json(c.out_path("train_timings.json"), {{"train_seconds", train_s},
                                                         {"project_seconds", project_s},
                                                         {"total_seconds", total.seconds()}});

  log << "train-project: " << s.groups << " groups, " << s.pairs << " training pairs";
  if (!s.training.loss_curve.empty()) {
    log << ", loss " << s.training.loss_curve.front() << " -> " << s.training.loss_curve.back();
  }
  log << "\n";
  for (const auto r : s.zero_rows) log << "warning: projected row " << set.key(r) << " is the zero vector\n";
  return s;
}

// ---------------------------------------------------------------------------

namespace detail {

inline bool dataset_present(const std::string& path) { return !path.empty() && std::filesystem::exists(path); }

inline nlohmann::ordered_json analogy_json(const AnalogyResult& r) {
  auto counts = [](const AnalogyCounts& c) {
    nlohmann::ordered_json j;
    j["total"] = c.total;
    j["attempted"] = c.attempted;
    j["correct"] = c.correct;
    j["skipped"] = c.skipped;
    j["accuracy"] = nullable(c.accuracy());
    return j;
  };
  nlohmann::ordered_json j;
  j["semantic"] = counts(r.semantic);
  j["syntactic"] = counts(r.syntactic);
  j["overall"] = counts(r.overall);
  auto cats = nlohmann::ordered_json::array();
  for (const auto& c : r.categories) {
    auto cj = counts(c.counts);
    cj["category"] = c.category;
    cj["section"] = c.section == AnalogySection::kSemantic ? "semantic" : "syntactic";
    cats.push_back(std::move(cj));
  }
  j["categories"] = cats;
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json run_eval(const RunConfig& c, std::ostream& log) {
  detail::Stopwatch total;
  std::vector<std::pair<std::string, EmbeddingSet>> spaces;
  if (c.space != SpaceSelector::kProjected) spaces.emplace_back("original", detail::load_embeddings_from(c));
  if (c.space != SpaceSelector::kOriginal) spaces.emplace_back("projected", load_embeddings(c.projected_path()));

  std::optional<std::vector<WordPairJudgment>> wordsim;
  std::optional<std::vector<ContextualPairJudgment>> scws;
  std::optional<std::vector<Quadruple>> analogy;
  if (detail::dataset_present(c.wordsim)) wordsim = load_wordsim(c.wordsim);
  if (detail::dataset_present(c.scws)) scws = load_scws(c.scws);
  if (detail::dataset_present(c.analogy)) analogy = load_analogy(c.analogy);

  nlohmann::ordered_json report;
  report["command"] = "eval";
  report["config"] = config_echo(c);
  nlohmann::ordered_json timings;

  nlohmann::ordered_json ws_json, scws_json, an_json;
  for (const auto& [name, set] : spaces) {
    if (wordsim) {
      detail::Stopwatch clock;
      const auto r = eval_wordsim(set, *wordsim);
      ws_json[name] = {{"avg_sim", detail::nullable(r.rho100)}, {"scored", r.scored}, {"skipped", r.skipped}};
      timings[name]["wordsim_seconds"] = clock.seconds();
      log << name << " wordsim avgSim rho*100 = " << r.rho100 << " (" << r.skipped << " skipped)\n";
    }
    if (scws) {
      detail::Stopwatch clock;
      const auto r = eval_scws(set, *scws, c.tau, c.window);
      scws_json[name] = {{"local_sim", detail::nullable(r.local_sim)},
                         {"avg_sim", detail::nullable(r.avg_sim)},
                         {"avg_sim_c", detail::nullable(r.avg_sim_c)},
                         {"scored", r.scored},
                         {"skipped", r.skipped}};
      timings[name]["scws_seconds"] = clock.seconds();
      log << name << " scws localSim/avgSim/avgSimC rho*100 = " << r.local_sim << " / " << r.avg_sim << " / "
          << r.avg_sim_c << " (" << r.skipped << " skipped)\n";
    }
    if (analogy) {
      detail::Stopwatch clock;
      const auto r = evaluate_all(set, *analogy, c.threads);
      an_json[name] = detail::analogy_json(r);
      timings[name]["analogy_seconds"] = clock.seconds();
      log << name << " analogy semantic/syntactic accuracy = " << r.semantic.accuracy().value_or(NAN) << " / "
          << r.syntactic.accuracy().value_or(NAN) << " (" << r.overall.skipped << " skipped)\n";
    }
  }
  report["wordsim"] = wordsim ? ws_json : nlohmann::ordered_json("absent");
  report["scws"] = scws ? scws_json : nlohmann::ordered_json("absent");
  report["analogy"] = analogy ? an_json : nlohmann::ordered_json("absent");

  detail::ensure_dir(c.out_dir);
  detail::write_json(c.out_path("eval_report.json"), report);
  timings["total_seconds"] = total.seconds();
  detail::write_json(c.out_path("eval_timings.json"), timings);
  return report;
}

// ---------------------------------------------------------------------------

// Per-sense neighbor listing with top domain and hypernym labels, followed by
// the pairs of senses judged to share a meaning. The graph is optional; with
// no graph only neighbors are printed.
inline void run_neighbors(const RunConfig& c, const std::string& word, std::ostream& out) {
  const auto set = detail::load_embeddings_from(c);
  const auto resolved = resolve_word(set, word);
  if (!resolved) throw KeyNotFoundError("unknown word '" + word + "'");
  std::optional<LexicalGraph> graph;
  if (!c.synsets.empty() || !c.hypernyms.empty() || !c.domains.empty()) graph = detail::load_graph_from(c);

  const auto k_count = set.sense_count(*resolved);
  std::vector<detail::SenseProfiles> profiles;
  for (std::size_t k = 0; k < k_count; ++k) {
    const SenseKey key{*resolved, k};
    const auto nn = nearest_neighbors(set, key, c.neighbors);
    out << key << "\n  neighbors:";
    for (std::size_t i = 0; i < nn.neighbors.size(); ++i) {
      out << (i ? ", " : " ") << nn.neighbors[i].key << " (" << std::fixed << std::setprecision(4)
          << nn.neighbors[i].score << ")";
    }
    out.unsetf(std::ios::floatfield);
    out << "\n";
    if (graph) {
      profiles.push_back({detail::domain_profile_from(*graph, nn), detail::hypernym_profile_from(*graph, nn)});
      out << "  domains:";
      for (const auto& l : top_n(profiles.back().domain, c.top_n)) out << ' ' << l;
      out << "\n  hypernyms:";
      for (const auto& l : top_n(profiles.back().hypernym, c.top_n)) out << ' ' << l;
      out << "\n";
    }
  }
  if (!graph || k_count < 2) return;

  std::vector<PseudoPair> pairs;
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t l = k + 1; l < k_count; ++l) {
      const auto sim = detail::combine(profiles[k], profiles[l], c.top_n);
      const bool same = sim.total > c.lambda;
      out << "verdict " << SenseKey{*resolved, k} << " " << SenseKey{*resolved, l} << ": "
          << (same ? "same meaning" : "different") << " (domain " << detail::format_double(sim.domain)
          << ", hypernym " << detail::format_double(sim.hypernym) << ", total "
          << detail::format_double(sim.total) << ")\n";
      if (same) pairs.push_back({*resolved, k, l, sim.domain, sim.hypernym, sim.total});
    }
  }
  for (const auto& g : build_groups(pairs)) {
    out << "group " << g.word << ":";
    for (const auto m : g.members) out << ' ' << m;
    out << "\n";
  }
}

}  // namespace psense
