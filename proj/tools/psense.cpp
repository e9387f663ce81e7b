#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "psense/pipeline.hpp"

namespace {

void add_common(CLI::App& cmd, psense::RunConfig& c) {
  cmd.add_option("--embeddings", c.embeddings, "Multi-sense embeddings (text format)");
  cmd.add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
  cmd.add_option("--seed", c.seed, "Seed for every random choice")->capture_default_str();
  cmd.add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_graph(CLI::App& cmd, psense::RunConfig& c) {
  cmd.add_option("--synsets", c.synsets, "synsets.tsv");
  cmd.add_option("--hypernyms", c.hypernyms, "hypernyms.tsv");
  cmd.add_option("--domains", c.domains, "domains.tsv");
}

void add_detection(CLI::App& cmd, psense::RunConfig& c) {
  cmd.add_option("--top-n", c.top_n, "Labels compared per profile")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd.add_option("--lambda", c.lambda, "Detection threshold (strict)")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  cmd.add_option("--neighbors", c.neighbors, "Nearest neighbors per sense")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect and remove pseudo multi-sense in multi-sense word embeddings"};
  app.require_subcommand(1);
  psense::RunConfig c;

  auto* detect = app.add_subcommand("detect", "Find senses of one word that share a meaning");
  add_common(*detect, c);
  add_graph(*detect, c);
  add_detection(*detect, c);

  const std::map<std::string, psense::RepresentativeMode> rep_modes{{"mean", psense::RepresentativeMode::kMean},
                                                                    {"random", psense::RepresentativeMode::kRandom}};
  auto* train = app.add_subcommand("train-project", "Learn the transition matrix and project the space");
  add_common(*train, c);
  train->add_option("--groups", c.groups, "Groups file (default <out-dir>/groups.tsv)");
  train->add_option("--projected", c.projected, "Projected embeddings output (default <out-dir>/projected.txt)");
  train->add_option("--rep", c.rep, "Representative vector")
      ->transform(CLI::CheckedTransformer(rep_modes, CLI::ignore_case))
      ->default_str("mean");
  train->add_option("--lr", c.lr, "SGD learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--epochs", c.epochs, "SGD epochs")->capture_default_str()->check(CLI::PositiveNumber);

  const std::map<std::string, psense::SpaceSelector> spaces{{"original", psense::SpaceSelector::kOriginal},
                                                            {"projected", psense::SpaceSelector::kProjected},
                                                            {"both", psense::SpaceSelector::kBoth}};
  auto* eval = app.add_subcommand("eval", "Score word similarity and analogy benchmarks");
  add_common(*eval, c);
  eval->add_option("--projected", c.projected, "Projected embeddings (default <out-dir>/projected.txt)");
  eval->add_option("--wordsim", c.wordsim, "WordSim-353 CSV");
  eval->add_option("--scws", c.scws, "SCWS TSV");
  eval->add_option("--analogy", c.analogy, "Analogy questions");
  eval->add_option("--tau", c.tau, "Sense posterior temperature")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--window", c.window, "Context tokens per side")->capture_default_str();
  eval->add_option("--space", c.space, "Spaces to score")
      ->transform(CLI::CheckedTransformer(spaces, CLI::ignore_case))
      ->default_str("both");

  std::string word;
  auto* neighbors = app.add_subcommand("neighbors", "Show each sense's neighbors and labels");
  add_common(*neighbors, c);
  add_graph(*neighbors, c);
  add_detection(*neighbors, c);
  neighbors->add_option("word", word, "Word to inspect")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect->parsed()) {
      psense::run_detect(c, std::cout);
    } else if (train->parsed()) {
      psense::run_train_project(c, std::cout);
    } else if (eval->parsed()) {
      psense::run_eval(c, std::cout);
    } else if (neighbors->parsed()) {
      psense::run_neighbors(c, word, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
