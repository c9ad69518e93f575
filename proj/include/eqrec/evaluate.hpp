#ifndef EQREC_EVALUATE_HPP
#define EQREC_EVALUATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "eqrec/equalize.hpp"
#include "eqrec/factorize.hpp"
#include "eqrec/ratings.hpp"

namespace eqrec {

enum class EvalSpace { original, equalized };

std::string to_string(EvalSpace space);

struct EvalReport {
  double mae = 0.0;
  double rmse = 0.0;
  EvalSpace eval_space = EvalSpace::original;
  double exposure_gini = 0.0;
  double popularity_corr = 0.0;
  bool popularity_corr_degenerate = false;
  double tail_share = 0.0;
  std::size_t n_test = 0;
};

// Flat JSON object with stable keys: mae, rmse, eval_space, exposure_gini,
// popularity_corr, popularity_corr_degenerate, tail_share, n_test.
void to_json(nlohmann::json& j, const EvalReport& report);

double mae(const std::vector<double>& predictions,
           const std::vector<double>& truths);
double rmse(const std::vector<double>& predictions,
            const std::vector<double>& truths);

// Accuracy over a test split. In the original space, predictions from a model
// trained on equalized data pass through invert(map, .) first; everything is
// then clamped to [levels.front(), levels.back()] and compared against raw
// test ratings. In the equalized space, raw predictions clamp to [0, r_max]
// and compare against map-transformed test ratings. `map` may be null only
// for the original-space / unequalized-model pathway.
struct Accuracy {
  double mae;
  double rmse;
};
Accuracy evaluate_accuracy(const FactorModel& model, const EqualizationMap* map,
                           const SparseRatings& test, EvalSpace space,
                           bool model_on_equalized);

// How often each item appears in users' top-k recommendation lists, where a
// user's candidates are the items it has not rated in train. Ties in score
// break toward the lower item index. The OpenMP version reduces per-thread
// integer counts, so it matches the serial reference exactly.
std::vector<std::int64_t> top_k_exposure(const FactorModel& model, int k,
                                         const SparseRatings& train);
std::vector<std::int64_t> top_k_exposure_serial(const FactorModel& model,
                                                int k,
                                                const SparseRatings& train);

// Gini coefficient over ALL catalog items, zero-exposure ones included.
double exposure_gini(const std::vector<double>& counts);
double exposure_gini(const std::vector<std::int64_t>& counts);

struct PopularityCorr {
  double value = 0.0;
  bool degenerate = false;
};

// Pearson correlation between item train-popularity (rating count) and the
// item's mean raw predicted score over its test pairs. Items without test
// pairs are excluded; zero variance in either series flags degenerate.
PopularityCorr popularity_corr(const FactorModel& model,
                               const SparseRatings& train,
                               const SparseRatings& test);

// Fraction of total exposure captured by the floor(tail_fraction * n_items)
// least-popular items by train rating count (popularity ties break toward the
// lower index).
double tail_share(const std::vector<std::int64_t>& counts,
                  const SparseRatings& train, double tail_fraction);

}  // namespace eqrec

#endif
