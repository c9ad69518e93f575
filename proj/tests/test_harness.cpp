#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "eqrec/errors.hpp"
#include "eqrec/harness.hpp"
#include "helpers.hpp"

using namespace eqrec;
using helpers::TempFile;

namespace {

// 8 users x 4 items, fully observed, ratings balanced over {1,2,3,4} so every
// level is well represented on both sides of any split.
std::string comoda_fixture_body() {
  std::ostringstream out;
  out << "userID,itemID,rating,context\n";
  for (int u = 0; u < 8; ++u)
    for (int i = 0; i < 4; ++i)
      out << (101 + u) << ',' << (11 + i) << ',' << ((u + i) % 4 + 1)
          << ",whatever\n";
  return out.str();
}

ExperimentConfig tiny_config(const std::string& dataset_path) {
  ExperimentConfig config;
  config.dataset_path = dataset_path;
  config.format = DatasetFormat::comoda_csv;
  config.test_fraction = 0.3;
  config.seed = 7;
  config.algorithms = {Algorithm::mf};
  config.equalize = EqualizeMode::both;
  config.eval_space = EvalSpaceMode::original;
  config.train.rank = 4;
  config.train.epochs = 5;
  config.train.learning_rate = 0.05;
  config.train.l2 = 0.01;
  config.train.seed = 7;
  config.top_k = 2;
  return config;
}

}  // namespace

TEST_CASE("run_experiment produces one row per requested cell") {
  TempFile data("tiny.csv");
  helpers::write_file(data.path(), comoda_fixture_body());
  ExperimentConfig config = tiny_config(data.path());

  ComparisonReport report = run_experiment(config);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].algorithm == Algorithm::mf);
  CHECK(report.rows[0].equalized == false);
  CHECK(report.rows[1].equalized == true);
  CHECK(report.dataset.n_users == 8);
  CHECK(report.dataset.n_items == 4);
  CHECK(report.r_max == 4.0);

  for (const ReportRow& row : report.rows) {
    REQUIRE(row.reports.size() == 1);
    CHECK(row.reports[0].n_test == 10);
    CHECK(std::isfinite(row.reports[0].mae));
    CHECK(row.reports[0].mae <= row.reports[0].rmse);
    CHECK(row.loss_trace.size() == 5);
  }
}

TEST_CASE("identical configs produce byte-identical report files") {
  TempFile data("tiny.csv");
  helpers::write_file(data.path(), comoda_fixture_body());
  TempFile out("report.json");

  ExperimentConfig config = tiny_config(data.path());
  config.eval_space = EvalSpaceMode::both;
  config.algorithms = {Algorithm::mf, Algorithm::kl_uniform};
  config.out_path = out.path();

  run_experiment(config);
  std::string a = helpers::read_file(out.path());
  run_experiment(config);
  std::string b = helpers::read_file(out.path());
  CHECK(!a.empty());
  CHECK(a == b);
}

TEST_CASE("adding an algorithm leaves existing cells untouched") {
  TempFile data("tiny.csv");
  helpers::write_file(data.path(), comoda_fixture_body());

  ExperimentConfig narrow = tiny_config(data.path());
  ExperimentConfig wide = tiny_config(data.path());
  wide.algorithms = {Algorithm::mf, Algorithm::kl_uniform};

  ComparisonReport a = run_experiment(narrow);
  ComparisonReport b = run_experiment(wide);
  REQUIRE(b.rows.size() == 4);
  for (std::size_t cell = 0; cell < 2; ++cell) {
    CHECK(a.rows[cell].loss_trace == b.rows[cell].loss_trace);
    CHECK(a.rows[cell].reports[0].mae == b.rows[cell].reports[0].mae);
    CHECK(a.rows[cell].reports[0].rmse == b.rows[cell].reports[0].rmse);
    CHECK(a.rows[cell].reports[0].exposure_gini ==
          b.rows[cell].reports[0].exposure_gini);
  }
}

TEST_CASE("in-cell failures carry the cell identity and write nothing") {
  TempFile data("tiny.csv");
  helpers::write_file(data.path(), comoda_fixture_body());
  TempFile out("report.json");

  ExperimentConfig config = tiny_config(data.path());
  config.train.learning_rate = 1e3;  // guaranteed divergence
  config.out_path = out.path();

  try {
    run_experiment(config);
    FAIL("expected an error");
  } catch (const error& e) {
    std::string what = e.what();
    CHECK(what.find("[algorithm=mf equalized=false]") != std::string::npos);
    CHECK(what.find("diverged") != std::string::npos);
  }
  CHECK(!std::filesystem::exists(out.path()));
}

TEST_CASE("config hash changes exactly when a field changes") {
  TempFile data("tiny.csv");
  ExperimentConfig a = tiny_config(data.path());
  ExperimentConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 8;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.train.epochs = 6;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.equalize_fit = EqualizeFit::joint;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("joint equalization fit completes and differs from train-only") {
  TempFile data("tiny.csv");
  helpers::write_file(data.path(), comoda_fixture_body());
  ExperimentConfig config = tiny_config(data.path());
  ComparisonReport train_only = run_experiment(config);
  config.equalize_fit = EqualizeFit::joint;
  ComparisonReport joint = run_experiment(config);
  CHECK(train_only.hash != joint.hash);
  REQUIRE(joint.rows.size() == 2);
  CHECK(std::isfinite(joint.rows[1].reports[0].mae));
}

TEST_CASE("subsample draws without replacement and re-densifies") {
  std::mt19937_64 rng(64);
  SparseRatings r = helpers::random_ratings(rng, 20, 20, 5);

  SUBCASE("full-size sample is permutation-equal to the input") {
    SparseRatings s = subsample(r, r.size(), 5);
    CHECK(s.n_users == r.n_users);
    CHECK(s.n_items == r.n_items);
    // Equal up to index renaming: compare through the raw identifiers.
    auto raw = [](const SparseRatings& x) {
      std::set<std::tuple<std::string, std::string, double>> keys;
      for (const auto& o : x.observations)
        keys.insert({x.user_ids[o.user], x.item_ids[o.item], o.rating});
      return keys;
    };
    CHECK(raw(s) == raw(r));
  }
  SUBCASE("single observation collapses to a 1x1 matrix") {
    SparseRatings s = subsample(r, 1, 5);
    CHECK(s.size() == 1);
    CHECK(s.n_users == 1);
    CHECK(s.n_items == 1);
    CHECK(s.observations[0].user == 0);
    CHECK(s.observations[0].item == 0);
  }
  SUBCASE("out-of-range sizes are rejected") {
    CHECK_THROWS_AS(subsample(r, 0, 5), domain_error);
    CHECK_THROWS_AS(subsample(r, r.size() + 1, 5), domain_error);
  }
}

TEST_CASE("different subsample seeds pick different observations") {
  SparseRatings r;
  r.n_users = 100;
  r.n_items = 10;
  r.levels = {1, 2, 3, 4, 5};
  for (int u = 0; u < 100; ++u) {
    r.user_ids.push_back(std::to_string(u));
    r.user_id_map.emplace(r.user_ids.back(), u);
  }
  for (int i = 0; i < 10; ++i) {
    r.item_ids.push_back(std::to_string(i));
    r.item_id_map.emplace(r.item_ids.back(), i);
  }
  for (int u = 0; u < 100; ++u)
    for (int i = 0; i < 10; ++i)
      r.observations.push_back({u, i, static_cast<double>(1 + (u + i) % 5)});

  SparseRatings a = subsample(r, 200, 1);
  SparseRatings b = subsample(r, 200, 2);
  auto raw = [](const SparseRatings& s) {
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& o : s.observations)
      keys.insert({s.user_ids[o.user], s.item_ids[o.item]});
    return keys;
  };
  CHECK(raw(a) != raw(b));
}

TEST_CASE("emit_plot_data writes parseable long-format metrics") {
  TempFile data("tiny.csv");
  helpers::write_file(data.path(), comoda_fixture_body());
  ComparisonReport report = run_experiment(tiny_config(data.path()));

  TempFile stem_holder("plots");
  const std::string stem = stem_holder.path();
  emit_plot_data(report, stem);

  std::string metrics = helpers::read_file(stem + "_metrics.csv");
  std::vector<std::string> lines;
  std::istringstream stream(metrics);
  for (std::string line; std::getline(stream, line);) lines.push_back(line);
  REQUIRE(lines.size() == 1 + 10);  // header + 2 rows x 5 metrics
  CHECK(lines[0] == "algorithm,equalized,metric,value");

  // Round trip: every printed value parses back to the exact double.
  std::size_t cursor = 1;
  for (const ReportRow& row : report.rows) {
    const EvalReport& er = row.reports[0];
    const double expected[5] = {er.mae, er.rmse, er.exposure_gini,
                                er.popularity_corr, er.tail_share};
    for (double value : expected) {
      const std::string& line = lines[cursor++];
      double parsed = std::strtod(line.substr(line.rfind(',') + 1).c_str(),
                                  nullptr);
      CHECK(parsed == value);
    }
  }

  std::string loss = helpers::read_file(stem + "_loss.csv");
  std::istringstream loss_stream(loss);
  std::size_t loss_lines = 0;
  for (std::string line; std::getline(loss_stream, line);) ++loss_lines;
  CHECK(loss_lines == 1 + 2 * 5);  // header + 2 rows x 5 epochs

  std::filesystem::remove(stem + "_metrics.csv");
  std::filesystem::remove(stem + "_loss.csv");

  SUBCASE("empty reports are rejected") {
    ComparisonReport empty;
    CHECK_THROWS_AS(emit_plot_data(empty, stem), domain_error);
  }
}

TEST_CASE("eval_space=both yields two reports per row") {
  TempFile data("tiny.csv");
  helpers::write_file(data.path(), comoda_fixture_body());
  ExperimentConfig config = tiny_config(data.path());
  config.eval_space = EvalSpaceMode::both;
  config.algorithms = {Algorithm::mf, Algorithm::kl_uniform};

  ComparisonReport report = run_experiment(config);
  REQUIRE(report.rows.size() == 4);
  for (const ReportRow& row : report.rows) {
    REQUIRE(row.reports.size() == 2);
    CHECK(row.reports[0].eval_space == EvalSpace::original);
    CHECK(row.reports[1].eval_space == EvalSpace::equalized);
    for (const EvalReport& er : row.reports) {
      CHECK(std::isfinite(er.mae));
      CHECK(er.mae <= er.rmse);
      CHECK(er.exposure_gini >= 0.0);
      CHECK(er.exposure_gini <= 1.0);
      CHECK(er.tail_share >= 0.0);
      CHECK(er.tail_share <= 1.0);
    }
  }
}
