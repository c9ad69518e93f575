#include "eqrec/factorize.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "eqrec/errors.hpp"

namespace eqrec {

void validate(const TrainConfig& config) {
  if (config.rank < 1) throw domain_error("rank must be >= 1");
  if (config.epochs < 0) throw domain_error("epochs must be >= 0");
  if (!(config.learning_rate > 0.0))
    throw domain_error("learning_rate must be positive");
  if (config.l2 < 0.0) throw domain_error("l2 must be non-negative");
  if (config.regularizer == Regularizer::kl_uniform) {
    if (config.kl_weight < 0.0)
      throw domain_error("kl_weight must be non-negative");
    if (!(config.kl_bandwidth > 0.0))
      throw domain_error("kl_bandwidth must be positive");
  }
  if (!(config.init_scale > 0.0))
    throw domain_error("init_scale must be positive");
  if (config.threads < 1) throw domain_error("threads must be >= 1");
}

FactorModel init_model(int n_users, int n_items, const TrainConfig& config) {
  validate(config);
  if (n_users < 1 || n_items < 1)
    throw domain_error("model needs at least one user and one item");

  FactorModel model;
  model.n_users = n_users;
  model.n_items = n_items;
  model.rank = config.rank;
  model.u_factors.resize(static_cast<std::size_t>(n_users) * config.rank);
  model.v_factors.resize(static_cast<std::size_t>(n_items) * config.rank);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> dist(-config.init_scale,
                                              config.init_scale);
  for (double& x : model.u_factors) x = dist(rng);
  for (double& x : model.v_factors) x = dist(rng);
  return model;
}

double predict(const FactorModel& model, int user, int item) {
  if (user < 0 || user >= model.n_users)
    throw domain_error("user index out of range");
  if (item < 0 || item >= model.n_items)
    throw domain_error("item index out of range");
  const double* u = model.user_row(user);
  const double* v = model.item_row(item);
  double p = 0.0;
  for (int f = 0; f < model.rank; ++f) p += u[f] * v[f];
  return p;
}

namespace {

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int f = 0; f < n; ++f) s += a[f] * b[f];
  return s;
}

std::vector<double> train_predictions(const FactorModel& model,
                                      const SparseRatings& ratings) {
  std::vector<double> preds(ratings.size());
  for (std::size_t k = 0; k < ratings.size(); ++k) {
    const auto& o = ratings.observations[k];
    preds[k] = dot(model.user_row(o.user), model.item_row(o.item), model.rank);
  }
  return preds;
}

double train_mse(const FactorModel& model, const SparseRatings& ratings) {
  double sum = 0.0;
  for (const auto& o : ratings.observations) {
    double e =
        o.rating - dot(model.user_row(o.user), model.item_row(o.item),
                       model.rank);
    sum += e * e;
  }
  return sum / static_cast<double>(ratings.size());
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::mt19937_64 epoch_rng(std::uint64_t seed, int epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch)};
  return std::mt19937_64(seq);
}

// Soft-bin weights for one prediction, computed with the usual max-shifted
// softmax. a_k = -(p - c_k)^2 / (2 sigma^2).
void soft_weights(double p, const std::vector<double>& centers, double sigma,
                  std::vector<double>& w) {
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const std::size_t K = centers.size();
  double amax = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    double d = p - centers[k];
    w[k] = -d * d * inv2s2;
    amax = std::max(amax, w[k]);
  }
  double z = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    w[k] = std::exp(w[k] - amax);
    z += w[k];
  }
  for (std::size_t k = 0; k < K; ++k) w[k] /= z;
}

}  // namespace

SoftBinStats kl_uniform_stats(const std::vector<double>& predictions,
                              const std::vector<double>& centers,
                              double sigma) {
  if (!(sigma > 0.0)) throw domain_error("sigma must be positive");
  if (centers.empty()) throw domain_error("no bin centers");
  if (predictions.empty()) throw empty_input_error("no predictions to bin");

  const std::size_t K = centers.size();
  SoftBinStats stats;
  stats.q.assign(K, 0.0);
  std::vector<double> w(K);
  for (double p : predictions) {
    soft_weights(p, centers, sigma, w);
    for (std::size_t k = 0; k < K; ++k) stats.q[k] += w[k];
  }
  const double n = static_cast<double>(predictions.size());
  for (std::size_t k = 0; k < K; ++k) stats.q[k] /= n;

  double kl = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (stats.q[k] > 0.0)
      kl += stats.q[k] * std::log(stats.q[k] * static_cast<double>(K));
  }
  stats.penalty = kl;
  return stats;
}

std::vector<double> kl_uniform_prediction_gradient(
    const std::vector<double>& predictions, const std::vector<double>& centers,
    double sigma) {
  SoftBinStats stats = kl_uniform_stats(predictions, centers, sigma);
  const std::size_t K = centers.size();
  const double n = static_cast<double>(predictions.size());
  const double inv_s2 = 1.0 / (sigma * sigma);

  // d KL / d q_k, with q clamped away from zero. Bins whose mass underflowed
  // receive no weight from any prediction, so the clamp never feeds a real
  // gradient.
  std::vector<double> dkl_dq(K);
  for (std::size_t k = 0; k < K; ++k) {
    double q = std::max(stats.q[k], 1e-300);
    dkl_dq[k] = std::log(q * static_cast<double>(K)) + 1.0;
  }

  std::vector<double> grad(predictions.size());
  std::vector<double> w(K), da(K);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double p = predictions[i];
    soft_weights(p, centers, sigma, w);
    double abar = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      da[k] = (centers[k] - p) * inv_s2;
      abar += w[k] * da[k];
    }
    double g = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double dw = w[k] * (da[k] - abar);
      g += dkl_dq[k] * dw;
    }
    grad[i] = g / n;
  }
  return grad;
}

std::vector<double> kl_regularizer_gradient(const FactorModel& model,
                                            const SparseRatings& ratings,
                                            double sigma) {
  if (!(sigma > 0.0)) throw domain_error("sigma must be positive");
  if (ratings.empty()) throw empty_input_error("empty ratings");
  return kl_uniform_prediction_gradient(train_predictions(model, ratings),
                                        ratings.levels, sigma);
}

double objective_value(const FactorModel& model, const SparseRatings& ratings,
                       const TrainConfig& config) {
  double value = 0.0;
  for (const auto& o : ratings.observations) {
    double e = o.rating -
               dot(model.user_row(o.user), model.item_row(o.item), model.rank);
    value += e * e;
  }
  if (config.l2 > 0.0) {
    double norms = 0.0;
    for (double x : model.u_factors) norms += x * x;
    for (double x : model.v_factors) norms += x * x;
    value += config.l2 * norms;
  }
  if (config.regularizer == Regularizer::kl_uniform && config.kl_weight > 0.0) {
    SoftBinStats stats = kl_uniform_stats(train_predictions(model, ratings),
                                          ratings.levels, config.kl_bandwidth);
    value += config.kl_weight * stats.penalty;
  }
  return value;
}

std::vector<double> objective_gradient(const FactorModel& model,
                                       const SparseRatings& ratings,
                                       const TrainConfig& config) {
  const int d = model.rank;
  const std::size_t nu = model.u_factors.size();
  std::vector<double> grad(nu + model.v_factors.size(), 0.0);

  std::vector<double> klg;
  if (config.regularizer == Regularizer::kl_uniform && config.kl_weight > 0.0)
    klg = kl_uniform_prediction_gradient(train_predictions(model, ratings),
                                         ratings.levels, config.kl_bandwidth);

  for (std::size_t idx = 0; idx < ratings.size(); ++idx) {
    const auto& o = ratings.observations[idx];
    const double* u = model.user_row(o.user);
    const double* v = model.item_row(o.item);
    double e = o.rating - dot(u, v, d);
    double coeff = -2.0 * e + (klg.empty() ? 0.0 : config.kl_weight * klg[idx]);
    double* gu = &grad[static_cast<std::size_t>(o.user) * d];
    double* gv = &grad[nu + static_cast<std::size_t>(o.item) * d];
    for (int f = 0; f < d; ++f) {
      gu[f] += coeff * v[f];
      gv[f] += coeff * u[f];
    }
  }
  if (config.l2 > 0.0) {
    for (std::size_t j = 0; j < nu; ++j)
      grad[j] += 2.0 * config.l2 * model.u_factors[j];
    for (std::size_t j = 0; j < model.v_factors.size(); ++j)
      grad[nu + j] += 2.0 * config.l2 * model.v_factors[j];
  }
  return grad;
}

TrainResult train(const SparseRatings& ratings, const TrainConfig& config) {
  validate(config);
  if (ratings.empty()) throw empty_input_error("cannot train on empty ratings");

  TrainResult result;
  result.model = init_model(ratings.n_users, ratings.n_items, config);
  FactorModel& model = result.model;
  const int d = config.rank;
  const double lr = config.learning_rate;
  const double l2 = config.l2;
  const bool use_kl =
      config.regularizer == Regularizer::kl_uniform && config.kl_weight > 0.0;
  const std::int64_t n = static_cast<std::int64_t>(ratings.size());

  std::vector<std::uint32_t> order(ratings.size());
  for (std::size_t k = 0; k < order.size(); ++k)
    order[k] = static_cast<std::uint32_t>(k);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // kl_uniform bin statistics are refreshed once per epoch; the per
    // observation scalar below is d penalty / d prediction at epoch start.
    std::vector<double> klg;
    if (use_kl)
      klg = kl_uniform_prediction_gradient(train_predictions(model, ratings),
                                           ratings.levels, config.kl_bandwidth);

    auto rng = epoch_rng(config.seed, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    auto update_one = [&](std::uint32_t idx) {
      const auto& o = ratings.observations[idx];
      double* u = model.user_row(o.user);
      double* v = model.item_row(o.item);
      double e = o.rating - dot(u, v, d);
      double kl_term = use_kl ? config.kl_weight * klg[idx] : 0.0;
      for (int f = 0; f < d; ++f) u[f] += lr * (e * v[f] - l2 * u[f] - kl_term * v[f]);
      for (int f = 0; f < d; ++f) v[f] += lr * (e * u[f] - l2 * v[f] - kl_term * u[f]);
    };

    if (config.threads == 1) {
      for (std::uint32_t idx : order) update_one(idx);
    } else {
#pragma omp parallel for schedule(static) num_threads(config.threads)
      for (std::int64_t k = 0; k < n; ++k) update_one(order[k]);
    }

    if (!all_finite(model.u_factors) || !all_finite(model.v_factors))
      throw divergence_error(epoch);
    double mse = train_mse(model, ratings);
    if (!std::isfinite(mse)) throw divergence_error(epoch);
    result.loss_trace.push_back(mse);
  }
  return result;
}

void save_model(const FactorModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << "n_users,n_items,rank\n"
      << model.n_users << ',' << model.n_items << ',' << model.rank << '\n';
  char buf[32];
  auto write_rows = [&](const std::vector<double>& m, int rows) {
    for (int r = 0; r < rows; ++r) {
      for (int f = 0; f < model.rank; ++f) {
        std::snprintf(buf, sizeof buf, "%.17g",
                      m[static_cast<std::size_t>(r) * model.rank + f]);
        out << buf << (f + 1 == model.rank ? '\n' : ',');
      }
    }
  };
  write_rows(model.u_factors, model.n_users);
  write_rows(model.v_factors, model.n_items);
  if (!out) throw io_error("write failed for " + path);
}

FactorModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n_users,n_items,rank", 0) != 0)
    throw schema_error("expected 'n_users,n_items,rank' header in " + path);
  FactorModel model;
  char comma;
  if (!std::getline(in, line))
    throw schema_error("missing dimensions line in " + path);
  std::istringstream dims(line);
  if (!(dims >> model.n_users >> comma >> model.n_items >> comma >>
        model.rank) ||
      model.n_users < 1 || model.n_items < 1 || model.rank < 1)
    throw schema_error("bad dimensions line in " + path);

  auto read_rows = [&](std::vector<double>& m, int rows, const char* what) {
    m.resize(static_cast<std::size_t>(rows) * model.rank);
    for (int r = 0; r < rows; ++r) {
      if (!std::getline(in, line))
        throw schema_error(std::string("truncated ") + what + " in " + path);
      std::istringstream row(line);
      for (int f = 0; f < model.rank; ++f) {
        if (f > 0) row >> comma;
        if (!(row >> m[static_cast<std::size_t>(r) * model.rank + f]))
          throw schema_error(std::string("bad ") + what + " row in " + path);
      }
    }
  };
  read_rows(model.u_factors, model.n_users, "U");
  read_rows(model.v_factors, model.n_items, "V");
  return model;
}

}  // namespace eqrec
