// Times the OpenMP kernels against their serial references on synthetic data.

#include <omp.h>

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "eqrec/evaluate.hpp"
#include "eqrec/factorize.hpp"
#include "eqrec/ratings.hpp"

namespace {

eqrec::SparseRatings synthetic(int n_users, int n_items, std::size_t n_obs,
                               std::uint64_t seed) {
  eqrec::SparseRatings out;
  out.n_users = n_users;
  out.n_items = n_items;
  out.levels = {1, 2, 3, 4, 5};
  out.user_ids.resize(n_users);
  out.item_ids.resize(n_items);
  for (int u = 0; u < n_users; ++u) out.user_ids[u] = std::to_string(u);
  for (int i = 0; i < n_items; ++i) out.item_ids[i] = std::to_string(i);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> user(0, n_users - 1);
  std::uniform_int_distribution<int> item(0, n_items - 1);
  std::uniform_int_distribution<int> level(1, 5);
  std::vector<std::vector<bool>> seen(n_users, std::vector<bool>(n_items));
  while (out.observations.size() < n_obs) {
    int u = user(rng), i = item(rng);
    if (seen[u][i]) continue;
    seen[u][i] = true;
    out.observations.push_back({u, i, static_cast<double>(level(rng))});
  }
  return out;
}

double time_train(const eqrec::SparseRatings& data, int threads) {
  eqrec::TrainConfig config;
  config.rank = 16;
  config.epochs = 5;
  config.threads = threads;
  double t0 = omp_get_wtime();
  eqrec::train(data, config);
  return omp_get_wtime() - t0;
}

}  // namespace

int main(int argc, char** argv) {
  int n_users = argc > 1 ? std::stoi(argv[1]) : 2000;
  int n_items = argc > 2 ? std::stoi(argv[2]) : 1500;
  std::size_t n_obs = argc > 3 ? std::stoul(argv[3]) : 200000;

  std::printf("synthetic: %d users, %d items, %zu observations, %d hw threads\n",
              n_users, n_items, n_obs, omp_get_max_threads());
  eqrec::SparseRatings data = synthetic(n_users, n_items, n_obs, 7);

  double serial = time_train(data, 1);
  double parallel = time_train(data, omp_get_max_threads());
  std::printf("sgd, 5 epochs, rank 16:   serial %7.3fs   omp %7.3fs   speedup %.2fx\n",
              serial, parallel, serial / parallel);

  eqrec::TrainConfig config;
  config.rank = 16;
  config.epochs = 1;
  eqrec::FactorModel model = eqrec::train(data, config).model;

  double t0 = omp_get_wtime();
  auto counts_serial = eqrec::top_k_exposure_serial(model, 10, data);
  double t1 = omp_get_wtime();
  auto counts_omp = eqrec::top_k_exposure(model, 10, data);
  double t2 = omp_get_wtime();
  bool match = counts_serial == counts_omp;
  std::printf("top-10 exposure:          serial %7.3fs   omp %7.3fs   speedup %.2fx   counts %s\n",
              t1 - t0, t2 - t1, (t1 - t0) / (t2 - t1),
              match ? "identical" : "DIFFER");
  return match ? 0 : 1;
}
