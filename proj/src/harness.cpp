#include "eqrec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "eqrec/errors.hpp"

namespace eqrec {

std::string to_string(DatasetFormat f) {
  return f == DatasetFormat::movielens_1m ? "movielens-1m" : "comoda-csv";
}
std::string to_string(EqualizeMode m) {
  switch (m) {
    case EqualizeMode::off: return "off";
    case EqualizeMode::on: return "on";
    default: return "both";
  }
}
std::string to_string(EqualizeFit f) {
  return f == EqualizeFit::train_only ? "train-only" : "joint";
}
std::string to_string(EvalSpaceMode m) {
  switch (m) {
    case EvalSpaceMode::original: return "original";
    case EvalSpaceMode::equalized: return "equalized";
    default: return "both";
  }
}
std::string to_string(Algorithm a) {
  return a == Algorithm::mf ? "mf" : "kl_uniform";
}

DatasetFormat parse_dataset_format(const std::string& s) {
  if (s == "movielens-1m") return DatasetFormat::movielens_1m;
  if (s == "comoda-csv") return DatasetFormat::comoda_csv;
  throw config_error("unknown dataset format '" + s + "'");
}
EqualizeMode parse_equalize_mode(const std::string& s) {
  if (s == "off") return EqualizeMode::off;
  if (s == "on") return EqualizeMode::on;
  if (s == "both") return EqualizeMode::both;
  throw config_error("unknown equalize mode '" + s + "'");
}
EqualizeFit parse_equalize_fit(const std::string& s) {
  if (s == "train-only") return EqualizeFit::train_only;
  if (s == "joint") return EqualizeFit::joint;
  throw config_error("unknown equalize-fit mode '" + s + "'");
}
EvalSpaceMode parse_eval_space_mode(const std::string& s) {
  if (s == "original") return EvalSpaceMode::original;
  if (s == "equalized") return EvalSpaceMode::equalized;
  if (s == "both") return EvalSpaceMode::both;
  throw config_error("unknown eval space '" + s + "'");
}
Algorithm parse_algorithm(const std::string& s) {
  if (s == "mf") return Algorithm::mf;
  if (s == "kl_uniform") return Algorithm::kl_uniform;
  throw config_error("unknown algorithm '" + s + "'");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json algos = nlohmann::json::array();
  for (Algorithm a : c.algorithms) algos.push_back(to_string(a));
  return nlohmann::json{
      {"dataset", c.dataset_path},
      {"format", to_string(c.format)},
      {"user_col", c.user_col},
      {"item_col", c.item_col},
      {"rating_col", c.rating_col},
      {"test_fraction", c.test_fraction},
      {"seed", c.seed},
      {"equalize", to_string(c.equalize)},
      {"equalize_fit", to_string(c.equalize_fit)},
      {"r_max", c.r_max ? nlohmann::json(*c.r_max) : nlohmann::json()},
      {"algorithms", algos},
      {"rank", c.train.rank},
      {"epochs", c.train.epochs},
      {"lr", c.train.learning_rate},
      {"l2", c.train.l2},
      {"kl_weight", c.train.kl_weight},
      {"kl_bandwidth", c.train.kl_bandwidth},
      {"init_scale", c.train.init_scale},
      {"threads", c.train.threads},
      {"eval_space", to_string(c.eval_space)},
      {"top_k", c.top_k},
      {"tail_fraction", c.tail_fraction},
      {"subsample",
       c.subsample_n ? nlohmann::json(*c.subsample_n) : nlohmann::json()},
      {"out", c.out_path},
  };
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string bytes = to_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace {

nlohmann::json to_json(const DatasetSummary& d) {
  return nlohmann::json{
      {"path", d.path},
      {"format", to_string(d.format)},
      {"n_users", d.n_users},
      {"n_items", d.n_items},
      {"n_observations", d.n_observations},
      {"levels", d.levels},
      {"subsampled_to", d.subsampled_to ? nlohmann::json(*d.subsampled_to)
                                        : nlohmann::json()},
  };
}

nlohmann::json train_config_json(const TrainConfig& t) {
  nlohmann::json j{
      {"rank", t.rank},
      {"epochs", t.epochs},
      {"lr", t.learning_rate},
      {"l2", t.l2},
      {"regularizer",
       t.regularizer == Regularizer::kl_uniform ? "kl_uniform" : "none"},
      {"seed", t.seed},
      {"init_scale", t.init_scale},
      {"threads", t.threads},
  };
  if (t.regularizer == Regularizer::kl_uniform) {
    j["kl_weight"] = t.kl_weight;
    j["kl_bandwidth"] = t.kl_bandwidth;
  }
  return j;
}

nlohmann::json to_json(const ReportRow& row) {
  nlohmann::json reports = nlohmann::json::array();
  for (const EvalReport& r : row.reports) reports.push_back(r);
  return nlohmann::json{
      {"algorithm", to_string(row.algorithm)},
      {"equalized", row.equalized},
      {"train_config", train_config_json(row.train_config)},
      {"loss_trace", row.loss_trace},
      {"reports", reports},
  };
}

}  // namespace

nlohmann::json to_json(const ComparisonReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ReportRow& row : report.rows) rows.push_back(to_json(row));
  return nlohmann::json{
      {"config", to_json(report.config)},
      {"config_hash", report.hash},
      {"dataset", to_json(report.dataset)},
      {"r_max", report.r_max},
      {"rows", rows},
  };
}

SparseRatings subsample(const SparseRatings& ratings, std::size_t n,
                        std::uint64_t seed) {
  if (n < 1 || n > ratings.size())
    throw domain_error("subsample size out of range");

  std::vector<std::size_t> order(ratings.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n);
  std::sort(order.begin(), order.end());

  SparseRatings out;
  out.levels = ratings.levels;
  auto intern = [](const std::string& raw,
                   std::unordered_map<std::string, int>& map,
                   std::vector<std::string>& ids) {
    auto it = map.find(raw);
    if (it != map.end()) return it->second;
    int index = static_cast<int>(ids.size());
    map.emplace(raw, index);
    ids.push_back(raw);
    return index;
  };
  for (std::size_t k : order) {
    const auto& o = ratings.observations[k];
    int u = intern(ratings.user_ids[o.user], out.user_id_map, out.user_ids);
    int i = intern(ratings.item_ids[o.item], out.item_id_map, out.item_ids);
    out.observations.push_back({u, i, o.rating});
  }
  out.n_users = static_cast<int>(out.user_ids.size());
  out.n_items = static_cast<int>(out.item_ids.size());
  return out;
}

namespace {

void validate(const ExperimentConfig& config) {
  if (config.dataset_path.empty()) throw config_error("dataset path not set");
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0))
    throw config_error("test_fraction must lie in (0,1)");
  if (config.algorithms.empty()) throw config_error("no algorithms requested");
  if (config.top_k < 1) throw config_error("top_k must be >= 1");
  if (!(config.tail_fraction > 0.0 && config.tail_fraction < 1.0))
    throw config_error("tail_fraction must lie in (0,1)");
  if (config.r_max && !(*config.r_max > 0.0))
    throw config_error("r_max must be positive");
  TrainConfig probe = config.train;
  probe.regularizer = Regularizer::kl_uniform;  // checks the kl knobs too
  eqrec::validate(probe);
}

}  // namespace

ComparisonReport run_experiment(const ExperimentConfig& config) {
  validate(config);

  SparseRatings data =
      config.format == DatasetFormat::movielens_1m
          ? load_movielens_1m(config.dataset_path)
          : load_comoda_csv(config.dataset_path, config.user_col,
                            config.item_col, config.rating_col);
  if (config.subsample_n)
    data = subsample(data, *config.subsample_n, config.seed);

  Split sp = split(data, config.test_fraction, config.seed);

  ComparisonReport report;
  report.config = config;
  report.hash = config_hash(config);
  report.dataset = {config.dataset_path, config.format, data.n_users,
                    data.n_items,        data.size(),   data.levels,
                    config.subsample_n};
  report.r_max = config.r_max ? *config.r_max : data.levels.back();

  const bool need_map = config.equalize != EqualizeMode::off ||
                        config.eval_space != EvalSpaceMode::original;
  EqualizationMap map;
  if (need_map) {
    if (config.equalize_fit == EqualizeFit::train_only) {
      map = build_equalization_map(build_histogram(sp.train), report.r_max);
    } else {
      SparseRatings joint = sp.train;
      joint.observations.insert(joint.observations.end(),
                                sp.test.observations.begin(),
                                sp.test.observations.end());
      map = build_equalization_map(build_histogram(joint), report.r_max);
    }
  }

  std::vector<bool> cells;
  switch (config.equalize) {
    case EqualizeMode::off: cells = {false}; break;
    case EqualizeMode::on: cells = {true}; break;
    case EqualizeMode::both: cells = {false, true}; break;
  }
  std::vector<EvalSpace> spaces;
  switch (config.eval_space) {
    case EvalSpaceMode::original: spaces = {EvalSpace::original}; break;
    case EvalSpaceMode::equalized: spaces = {EvalSpace::equalized}; break;
    case EvalSpaceMode::both:
      spaces = {EvalSpace::original, EvalSpace::equalized};
      break;
  }

  for (Algorithm algorithm : config.algorithms) {
    for (bool equalized : cells) {
      const std::string cell = "[algorithm=" + to_string(algorithm) +
                               " equalized=" + (equalized ? "true" : "false") +
                               "]";
      try {
        ReportRow row;
        row.algorithm = algorithm;
        row.equalized = equalized;
        row.train_config = config.train;
        row.train_config.regularizer = algorithm == Algorithm::kl_uniform
                                           ? Regularizer::kl_uniform
                                           : Regularizer::none;

        SparseRatings train_data =
            equalized ? apply(map, sp.train) : sp.train;
        TrainResult trained = train(train_data, row.train_config);
        row.loss_trace = std::move(trained.loss_trace);

        auto counts =
            top_k_exposure(trained.model, config.top_k, sp.train);
        double gini = exposure_gini(counts);
        double tail = tail_share(counts, sp.train, config.tail_fraction);
        PopularityCorr corr =
            popularity_corr(trained.model, sp.train, sp.test);

        for (EvalSpace space : spaces) {
          Accuracy acc =
              evaluate_accuracy(trained.model, need_map ? &map : nullptr,
                                sp.test, space, equalized);
          EvalReport er;
          er.mae = acc.mae;
          er.rmse = acc.rmse;
          er.eval_space = space;
          er.exposure_gini = gini;
          er.popularity_corr = corr.value;
          er.popularity_corr_degenerate = corr.degenerate;
          er.tail_share = tail;
          er.n_test = sp.test.size();
          row.reports.push_back(er);
        }
        report.rows.push_back(std::move(row));
      } catch (const error& e) {
        throw error(cell + " " + e.what());
      }
    }
  }

  if (!config.out_path.empty()) save_report(report, config.out_path);
  return report;
}

void save_report(const ComparisonReport& report, const std::string& path) {
  const std::string body = to_json(report).dump(2) + "\n";
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + tmp);
    out << body;
    if (!out) throw io_error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot move " + tmp + " to " + path);
}

void emit_plot_data(const ComparisonReport& report, const std::string& stem) {
  if (report.rows.empty()) throw domain_error("empty report");

  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };

  std::ofstream metrics(stem + "_metrics.csv");
  if (!metrics) throw io_error("cannot write " + stem + "_metrics.csv");
  metrics << "algorithm,equalized,metric,value\n";
  for (const ReportRow& row : report.rows) {
    const std::string prefix = to_string(row.algorithm) + "," +
                               (row.equalized ? "true" : "false") + ",";
    for (const EvalReport& r : row.reports) {
      const std::string space = to_string(r.eval_space);
      metrics << prefix << "mae_" << space << ',' << fmt(r.mae) << '\n';
      metrics << prefix << "rmse_" << space << ',' << fmt(r.rmse) << '\n';
    }
    // Fairness metrics do not depend on the eval space; emit them once.
    const EvalReport& first = row.reports.front();
    metrics << prefix << "exposure_gini," << fmt(first.exposure_gini) << '\n';
    metrics << prefix << "popularity_corr," << fmt(first.popularity_corr)
            << '\n';
    metrics << prefix << "tail_share," << fmt(first.tail_share) << '\n';
  }
  if (!metrics) throw io_error("write failed for " + stem + "_metrics.csv");

  std::ofstream loss(stem + "_loss.csv");
  if (!loss) throw io_error("cannot write " + stem + "_loss.csv");
  loss << "algorithm,equalized,epoch,mse\n";
  for (const ReportRow& row : report.rows) {
    const std::string prefix = to_string(row.algorithm) + "," +
                               (row.equalized ? "true" : "false") + ",";
    for (std::size_t epoch = 0; epoch < row.loss_trace.size(); ++epoch)
      loss << prefix << epoch << ',' << fmt(row.loss_trace[epoch]) << '\n';
  }
  if (!loss) throw io_error("write failed for " + stem + "_loss.csv");
}

}  // namespace eqrec
