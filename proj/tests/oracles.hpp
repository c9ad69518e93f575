// Brute-force reference computations the tests check the library against.
// Everything here is deliberately naive and independent of the library's
// implementation paths.

#ifndef EQREC_TESTS_ORACLES_HPP
#define EQREC_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracles {

// Cumulative-frequency transform: r_max * sum of frequencies through level k.
inline std::vector<double> equalization_cdf(
    const std::vector<std::int64_t>& counts, double r_max) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  std::vector<double> out(counts.size());
  double cumulative = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    cumulative += static_cast<double>(counts[k]) / total;
    out[k] = r_max * cumulative;
  }
  return out;
}

// O(n^2) pairwise-difference Gini.
inline double gini(const std::vector<double>& x) {
  double total = std::accumulate(x.begin(), x.end(), 0.0);
  double diff_sum = 0.0;
  for (double a : x)
    for (double b : x) diff_sum += std::abs(a - b);
  return diff_sum / (2.0 * static_cast<double>(x.size()) * total);
}

// Textbook Pearson correlation.
inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Exhaustive top-k selection over a dense score table. scores[u][i] is user
// u's score for item i; rated[u][i] marks items excluded from candidates.
// Ties break toward the lower item index.
inline std::vector<std::int64_t> top_k_counts(
    const std::vector<std::vector<double>>& scores,
    const std::vector<std::vector<bool>>& rated, int k) {
  const std::size_t n_items = scores.empty() ? 0 : scores[0].size();
  std::vector<std::int64_t> counts(n_items, 0);
  for (std::size_t u = 0; u < scores.size(); ++u) {
    std::vector<int> picked;
    std::vector<bool> used(n_items, false);
    for (int round = 0; round < k; ++round) {
      int best = -1;
      for (std::size_t i = 0; i < n_items; ++i) {
        if (rated[u][i] || used[i]) continue;
        if (best < 0 || scores[u][i] > scores[u][best]) best = static_cast<int>(i);
      }
      if (best < 0) break;
      used[best] = true;
      picked.push_back(best);
    }
    for (int i : picked) ++counts[i];
  }
  return counts;
}

// Soft-binned prediction distribution and its KL divergence from uniform,
// computed directly from the definition.
struct SoftBin {
  std::vector<double> q;
  double kl;
};
inline SoftBin soft_bin_kl(const std::vector<double>& preds,
                           const std::vector<double>& centers, double sigma) {
  const std::size_t K = centers.size();
  SoftBin out{std::vector<double>(K, 0.0), 0.0};
  for (double p : preds) {
    std::vector<double> w(K);
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double d = p - centers[k];
      w[k] = std::exp(-d * d / (2.0 * sigma * sigma));
      z += w[k];
    }
    for (std::size_t k = 0; k < K; ++k) out.q[k] += w[k] / z;
  }
  for (std::size_t k = 0; k < K; ++k) out.q[k] /= static_cast<double>(preds.size());
  for (std::size_t k = 0; k < K; ++k)
    if (out.q[k] > 0.0)
      out.kl += out.q[k] * std::log(out.q[k] * static_cast<double>(K));
  return out;
}

// Central finite differences of f over a parameter vector, step h.
template <typename F>
std::vector<double> central_differences(F f, std::vector<double> params,
                                        double h) {
  std::vector<double> grad(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    double saved = params[j];
    params[j] = saved + h;
    double plus = f(params);
    params[j] = saved - h;
    double minus = f(params);
    params[j] = saved;
    grad[j] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

}  // namespace oracles

#endif
