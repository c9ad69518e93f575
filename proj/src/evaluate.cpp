#include "eqrec/evaluate.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eqrec/errors.hpp"

namespace eqrec {

std::string to_string(EvalSpace space) {
  return space == EvalSpace::original ? "original" : "equalized";
}

void to_json(nlohmann::json& j, const EvalReport& report) {
  j = nlohmann::json{
      {"mae", report.mae},
      {"rmse", report.rmse},
      {"eval_space", to_string(report.eval_space)},
      {"exposure_gini", report.exposure_gini},
      {"popularity_corr", report.popularity_corr},
      {"popularity_corr_degenerate", report.popularity_corr_degenerate},
      {"tail_share", report.tail_share},
      {"n_test", report.n_test},
  };
}

namespace {

void check_pair(const std::vector<double>& predictions,
                const std::vector<double>& truths) {
  if (predictions.empty()) throw domain_error("empty prediction list");
  if (predictions.size() != truths.size())
    throw domain_error("prediction/truth length mismatch");
}

}  // namespace

double mae(const std::vector<double>& predictions,
           const std::vector<double>& truths) {
  check_pair(predictions, truths);
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    sum += std::abs(predictions[i] - truths[i]);
  return sum / static_cast<double>(predictions.size());
}

double rmse(const std::vector<double>& predictions,
            const std::vector<double>& truths) {
  check_pair(predictions, truths);
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double d = predictions[i] - truths[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

Accuracy evaluate_accuracy(const FactorModel& model, const EqualizationMap* map,
                           const SparseRatings& test, EvalSpace space,
                           bool model_on_equalized) {
  if (test.empty()) throw empty_input_error("empty test split");
  if (space == EvalSpace::equalized && map == nullptr)
    throw config_error("equalized-space evaluation needs an equalization map");
  if (space == EvalSpace::original && model_on_equalized && map == nullptr)
    throw config_error(
        "original-space evaluation of an equalized model needs the map");

  std::vector<double> preds, truths;
  preds.reserve(test.size());
  truths.reserve(test.size());

  if (space == EvalSpace::original) {
    const double lo = test.levels.front();
    const double hi = test.levels.back();
    for (const auto& o : test.observations) {
      double p = predict(model, o.user, o.item);
      if (model_on_equalized) p = invert(*map, p);
      preds.push_back(std::clamp(p, lo, hi));
      truths.push_back(o.rating);
    }
  } else {
    for (const auto& o : test.observations) {
      double p = predict(model, o.user, o.item);
      preds.push_back(std::clamp(p, 0.0, map->r_max));
      auto it = std::lower_bound(map->levels.begin(), map->levels.end(),
                                 o.rating);
      if (it == map->levels.end() || *it != o.rating)
        throw unknown_level_error(o.rating);
      truths.push_back(
          map->transformed[static_cast<std::size_t>(it - map->levels.begin())]);
    }
  }
  return Accuracy{mae(preds, truths), rmse(preds, truths)};
}

namespace {

std::vector<std::vector<int>> rated_items_per_user(const SparseRatings& train) {
  std::vector<std::vector<int>> rated(train.n_users);
  for (const auto& o : train.observations) rated[o.user].push_back(o.item);
  return rated;
}

// Top-k candidates for one user, appended to counts.
void expose_user(const FactorModel& model, int user, int k,
                 const std::vector<int>& rated, std::vector<bool>& is_rated,
                 std::vector<std::pair<double, int>>& scored,
                 std::vector<std::int64_t>& counts) {
  for (int i : rated) is_rated[i] = true;
  scored.clear();
  const double* u = model.user_row(user);
  for (int i = 0; i < model.n_items; ++i) {
    if (is_rated[i]) continue;
    const double* v = model.item_row(i);
    double s = 0.0;
    for (int f = 0; f < model.rank; ++f) s += u[f] * v[f];
    scored.emplace_back(s, i);
  }
  for (int i : rated) is_rated[i] = false;

  auto better = [](const std::pair<double, int>& a,
                   const std::pair<double, int>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::size_t take = std::min<std::size_t>(scored.size(),
                                           static_cast<std::size_t>(k));
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    better);
  for (std::size_t j = 0; j < take; ++j) ++counts[scored[j].second];
}

}  // namespace

std::vector<std::int64_t> top_k_exposure_serial(const FactorModel& model,
                                                int k,
                                                const SparseRatings& train) {
  if (k < 1) throw domain_error("k must be >= 1");
  auto rated = rated_items_per_user(train);
  std::vector<std::int64_t> counts(model.n_items, 0);
  std::vector<bool> is_rated(model.n_items, false);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(model.n_items);
  for (int u = 0; u < model.n_users; ++u)
    expose_user(model, u, k, rated[u], is_rated, scored, counts);
  return counts;
}

std::vector<std::int64_t> top_k_exposure(const FactorModel& model, int k,
                                         const SparseRatings& train) {
  if (k < 1) throw domain_error("k must be >= 1");
  auto rated = rated_items_per_user(train);
  std::vector<std::int64_t> counts(model.n_items, 0);

#pragma omp parallel
  {
    std::vector<std::int64_t> local(model.n_items, 0);
    std::vector<bool> is_rated(model.n_items, false);
    std::vector<std::pair<double, int>> scored;
    scored.reserve(model.n_items);
#pragma omp for schedule(static)
    for (int u = 0; u < model.n_users; ++u)
      expose_user(model, u, k, rated[u], is_rated, scored, local);
#pragma omp critical
    for (int i = 0; i < model.n_items; ++i) counts[i] += local[i];
  }
  return counts;
}

double exposure_gini(const std::vector<double>& counts) {
  if (counts.empty()) throw domain_error("no items");
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0) throw domain_error("negative exposure count");
    total += c;
  }
  if (total <= 0.0) throw domain_error("zero total exposure");

  std::vector<double> sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // Sorted form of sum_i sum_j |x_i - x_j| / (2 n sum x).
  double weighted = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    weighted += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
  return weighted / (n * total);
}

double exposure_gini(const std::vector<std::int64_t>& counts) {
  return exposure_gini(std::vector<double>(counts.begin(), counts.end()));
}

PopularityCorr popularity_corr(const FactorModel& model,
                               const SparseRatings& train,
                               const SparseRatings& test) {
  std::vector<std::int64_t> popularity(model.n_items, 0);
  for (const auto& o : train.observations) ++popularity[o.item];

  std::vector<double> pred_sum(model.n_items, 0.0);
  std::vector<std::int64_t> pred_count(model.n_items, 0);
  for (const auto& o : test.observations) {
    pred_sum[o.item] += predict(model, o.user, o.item);
    ++pred_count[o.item];
  }

  std::vector<double> xs, ys;  // popularity, mean predicted score
  for (int i = 0; i < model.n_items; ++i) {
    if (pred_count[i] == 0) continue;
    xs.push_back(static_cast<double>(popularity[i]));
    ys.push_back(pred_sum[i] / static_cast<double>(pred_count[i]));
  }
  if (xs.size() < 2)
    throw domain_error("popularity_corr needs at least 2 items with test predictions");

  const double n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {sxy / std::sqrt(sxx * syy), false};
}

double tail_share(const std::vector<std::int64_t>& counts,
                  const SparseRatings& train, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
    throw domain_error("tail_fraction must lie in (0,1)");
  if (counts.empty()) throw domain_error("no items");
  if (static_cast<int>(counts.size()) != train.n_items)
    throw domain_error("exposure counts do not match the catalog size");

  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  if (total <= 0) throw domain_error("zero total exposure");

  std::vector<std::int64_t> popularity(train.n_items, 0);
  for (const auto& o : train.observations) ++popularity[o.item];

  std::vector<int> items(train.n_items);
  std::iota(items.begin(), items.end(), 0);
  std::sort(items.begin(), items.end(), [&](int a, int b) {
    if (popularity[a] != popularity[b]) return popularity[a] < popularity[b];
    return a < b;
  });

  const auto n_tail = static_cast<std::size_t>(std::floor(
      tail_fraction * static_cast<double>(train.n_items) + 1e-9));
  std::int64_t tail_total = 0;
  for (std::size_t j = 0; j < n_tail; ++j) tail_total += counts[items[j]];
  return static_cast<double>(tail_total) / static_cast<double>(total);
}

}  // namespace eqrec
