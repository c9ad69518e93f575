#ifndef EQREC_FACTORIZE_HPP
#define EQREC_FACTORIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "eqrec/ratings.hpp"

namespace eqrec {

enum class Regularizer { none, kl_uniform };

struct TrainConfig {
  int rank = 16;
  int epochs = 30;
  double learning_rate = 0.005;
  double l2 = 0.02;
  Regularizer regularizer = Regularizer::none;
  double kl_weight = 0.1;     // used when regularizer == kl_uniform
  double kl_bandwidth = 0.5;  // Gaussian kernel sigma for the soft bins
  std::uint64_t seed = 42;
  double init_scale = 0.1;
  // 1 keeps the deterministic per-observation schedule. Anything larger runs
  // unsynchronized (hogwild-style) epochs over OpenMP threads; results are
  // then non-deterministic and the determinism contracts do not apply.
  int threads = 1;
};

void validate(const TrainConfig& config);

// Row-major latent factors: user u's row is u_factors[u*rank .. u*rank+rank).
struct FactorModel {
  std::vector<double> u_factors;
  std::vector<double> v_factors;
  int n_users = 0;
  int n_items = 0;
  int rank = 0;

  const double* user_row(int u) const { return &u_factors[u * rank]; }
  const double* item_row(int i) const { return &v_factors[i * rank]; }
  double* user_row(int u) { return &u_factors[u * rank]; }
  double* item_row(int i) { return &v_factors[i * rank]; }
};

// Entries i.i.d. uniform on (-init_scale, init_scale), seeded by config.seed.
FactorModel init_model(int n_users, int n_items, const TrainConfig& config);

double predict(const FactorModel& model, int user, int item);

struct TrainResult {
  FactorModel model;
  std::vector<double> loss_trace;  // train MSE after each epoch
};

// Per-observation SGD on squared error + L2, plus the kl_uniform penalty when
// configured. Epoch order is a seeded reshuffle (seed mixed with the epoch
// index); any non-finite factor entry aborts with divergence_error.
TrainResult train(const SparseRatings& ratings, const TrainConfig& config);

// --- kl_uniform stand-in ----------------------------------------------------
// Soft-bin predictions into the rating-level bins with Gaussian kernel
// weights w_k(p) proportional to exp(-(p - center_k)^2 / (2 sigma^2)),
// normalized over k. The penalty is KL(qhat || uniform) where qhat is the
// mean soft-bin assignment over all predictions.

struct SoftBinStats {
  std::vector<double> q;  // soft-binned prediction distribution, sums to 1
  double penalty = 0.0;   // KL(q || uniform over the K bins)
};

SoftBinStats kl_uniform_stats(const std::vector<double>& predictions,
                              const std::vector<double>& centers,
                              double sigma);

// d penalty / d prediction_i for every prediction, propagated analytically
// through the soft bins.
std::vector<double> kl_uniform_prediction_gradient(
    const std::vector<double>& predictions, const std::vector<double>& centers,
    double sigma);

// Per-observation d penalty / d prediction for the model's current train
// predictions; bin centers are the ratings' levels.
std::vector<double> kl_regularizer_gradient(const FactorModel& model,
                                            const SparseRatings& ratings,
                                            double sigma);

// --- full-batch objective ----------------------------------------------------
// J = sum of squared errors + l2 * (|U|^2 + |V|^2) + kl_weight * KL penalty.
// The gradient is packed as [U row-major, then V row-major] and is what the
// finite-difference checks compare against.

double objective_value(const FactorModel& model, const SparseRatings& ratings,
                       const TrainConfig& config);
std::vector<double> objective_gradient(const FactorModel& model,
                                       const SparseRatings& ratings,
                                       const TrainConfig& config);

// Text layout: `n_users,n_items,rank` header, then row-major U rows, then V
// rows, all at 17 significant digits.
void save_model(const FactorModel& model, const std::string& path);
FactorModel load_model(const std::string& path);

}  // namespace eqrec

#endif
