#ifndef EQREC_HARNESS_HPP
#define EQREC_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eqrec/equalize.hpp"
#include "eqrec/evaluate.hpp"
#include "eqrec/factorize.hpp"
#include "eqrec/ratings.hpp"

namespace eqrec {

enum class DatasetFormat { movielens_1m, comoda_csv };
enum class EqualizeMode { off, on, both };
enum class EqualizeFit { train_only, joint };
enum class EvalSpaceMode { original, equalized, both };
enum class Algorithm { mf, kl_uniform };

std::string to_string(DatasetFormat f);
std::string to_string(EqualizeMode m);
std::string to_string(EqualizeFit f);
std::string to_string(EvalSpaceMode m);
std::string to_string(Algorithm a);

DatasetFormat parse_dataset_format(const std::string& s);
EqualizeMode parse_equalize_mode(const std::string& s);
EqualizeFit parse_equalize_fit(const std::string& s);
EvalSpaceMode parse_eval_space_mode(const std::string& s);
Algorithm parse_algorithm(const std::string& s);

struct ExperimentConfig {
  std::string dataset_path;
  DatasetFormat format = DatasetFormat::movielens_1m;
  std::string user_col = "userID";  // CoMoDa column names
  std::string item_col = "itemID";
  std::string rating_col = "rating";
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  EqualizeMode equalize = EqualizeMode::both;
  EqualizeFit equalize_fit = EqualizeFit::train_only;
  std::optional<double> r_max;  // default: maximum raw level
  std::vector<Algorithm> algorithms{Algorithm::mf, Algorithm::kl_uniform};
  TrainConfig train;  // shared knobs; regularizer resolved per algorithm
  EvalSpaceMode eval_space = EvalSpaceMode::original;
  int top_k = 10;
  double tail_fraction = 0.8;
  std::optional<std::size_t> subsample_n;
  std::string out_path;  // report JSON destination; empty skips writing
};

nlohmann::json to_json(const ExperimentConfig& config);

// FNV-1a over the canonical config JSON, hex-encoded.
std::string config_hash(const ExperimentConfig& config);

struct DatasetSummary {
  std::string path;
  DatasetFormat format = DatasetFormat::movielens_1m;
  int n_users = 0;
  int n_items = 0;
  std::size_t n_observations = 0;
  std::vector<double> levels;
  std::optional<std::size_t> subsampled_to;
};

struct ReportRow {
  Algorithm algorithm = Algorithm::mf;
  bool equalized = false;
  TrainConfig train_config;           // the exact per-cell configuration
  std::vector<double> loss_trace;     // per-epoch train MSE
  std::vector<EvalReport> reports;    // one per requested eval space
};

struct ComparisonReport {
  ExperimentConfig config;
  std::string hash;
  DatasetSummary dataset;
  double r_max = 0.0;
  std::vector<ReportRow> rows;
};

nlohmann::json to_json(const ComparisonReport& report);

// Load -> (subsample) -> split once -> per cell: equalize, train, evaluate.
// Every requested (algorithm x equalization) cell sees the same split. If
// config.out_path is set the report is written atomically (temp file +
// rename); nothing is written when any cell fails.
ComparisonReport run_experiment(const ExperimentConfig& config);

// Seeded uniform sample without replacement; indices re-densified in
// first-appearance order, levels inherited from the source.
SparseRatings subsample(const SparseRatings& ratings, std::size_t n,
                        std::uint64_t seed);

// Writes <stem>_metrics.csv (long format: algorithm,equalized,metric,value;
// accuracy metrics suffixed with their eval space) and <stem>_loss.csv
// (algorithm,equalized,epoch,mse), both at 17 significant digits.
void emit_plot_data(const ComparisonReport& report, const std::string& stem);

void save_report(const ComparisonReport& report, const std::string& path);

}  // namespace eqrec

#endif
