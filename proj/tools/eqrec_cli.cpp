#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "eqrec/errors.hpp"
#include "eqrec/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = csv.find(',', pos);
    if (next == std::string::npos) {
      out.push_back(csv.substr(pos));
      break;
    }
    out.push_back(csv.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::string plot_stem(const std::string& out_path) {
  const std::string suffix = ".json";
  if (out_path.size() > suffix.size() &&
      out_path.compare(out_path.size() - suffix.size(), suffix.size(),
                       suffix) == 0)
    return out_path.substr(0, out_path.size() - suffix.size());
  return out_path;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"histogram-equalized recommender experiments"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand(
      "run", "load -> (equalize) -> train -> evaluate, one report per cell");

  eqrec::ExperimentConfig config;
  std::string format = "movielens-1m";
  std::string algos = "mf,kl_uniform";
  std::string equalize = "both";
  std::string equalize_fit = "train-only";
  std::string eval_space = "original";
  double r_max = 0.0;
  std::uint64_t subsample_n = 0;

  run->add_option("--dataset", config.dataset_path, "ratings file")
      ->required();
  run->add_option("--format", format, "movielens-1m|comoda-csv");
  run->add_option("--user-col", config.user_col, "CoMoDa user column");
  run->add_option("--item-col", config.item_col, "CoMoDa item column");
  run->add_option("--rating-col", config.rating_col, "CoMoDa rating column");
  run->add_option("--algos", algos, "comma list of mf,kl_uniform");
  run->add_option("--equalize", equalize, "on|off|both");
  run->add_option("--equalize-fit", equalize_fit, "train-only|joint");
  run->add_option("--r-max", r_max, "equalization scale (default: max level)");
  run->add_option("--rank", config.train.rank, "latent dimension");
  run->add_option("--epochs", config.train.epochs, "SGD epochs");
  run->add_option("--lr", config.train.learning_rate, "learning rate");
  run->add_option("--l2", config.train.l2, "L2 weight");
  run->add_option("--kl-weight", config.train.kl_weight,
                  "kl_uniform penalty weight");
  run->add_option("--kl-bandwidth", config.train.kl_bandwidth,
                  "kl_uniform soft-bin sigma");
  run->add_option("--init-scale", config.train.init_scale,
                  "factor init range");
  run->add_option("--test-fraction", config.test_fraction, "test share");
  run->add_option("--seed", config.seed, "split/init seed");
  run->add_option("--subsample", subsample_n,
                  "train on a seeded subsample of this many observations");
  run->add_option("--eval-space", eval_space, "original|equalized|both");
  run->add_option("--top-k", config.top_k, "recommendation list length");
  run->add_option("--tail-fraction", config.tail_fraction,
                  "catalog share counted as the long tail");
  run->add_option("--threads", config.train.threads,
                  "SGD threads; >1 is hogwild-style and non-deterministic");
  run->add_option("--out", config.out_path, "report JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    config.format = eqrec::parse_dataset_format(format);
    config.equalize = eqrec::parse_equalize_mode(equalize);
    config.equalize_fit = eqrec::parse_equalize_fit(equalize_fit);
    config.eval_space = eqrec::parse_eval_space_mode(eval_space);
    config.algorithms.clear();
    for (const std::string& name : split_list(algos))
      config.algorithms.push_back(eqrec::parse_algorithm(name));
    if (run->count("--r-max")) config.r_max = r_max;
    if (run->count("--subsample")) config.subsample_n = subsample_n;
    config.train.seed = config.seed;

    std::cerr << eqrec::to_json(config).dump(2) << std::endl;

    eqrec::ComparisonReport report = eqrec::run_experiment(config);
    eqrec::emit_plot_data(report, plot_stem(config.out_path));

    std::cerr << "report: " << config.out_path << " (" << report.rows.size()
              << " rows, hash " << report.hash << ")" << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
