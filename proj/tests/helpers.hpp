#ifndef EQREC_TESTS_HELPERS_HPP
#define EQREC_TESTS_HELPERS_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "eqrec/ratings.hpp"

namespace helpers {

// Self-cleaning temp file path under the system temp directory.
class TempFile {
 public:
  explicit TempFile(const std::string& name) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("eqrec_test_" + std::to_string(++counter) + "_" + name))
                .string();
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Random SparseRatings with every user/item index occupied and one
// observation per sampled (user, item) pair.
inline eqrec::SparseRatings random_ratings(std::mt19937_64& rng,
                                           int max_users = 12,
                                           int max_items = 12,
                                           int max_levels = 5) {
  std::uniform_int_distribution<int> users(1, max_users);
  std::uniform_int_distribution<int> items(1, max_items);
  std::uniform_int_distribution<int> n_levels(1, max_levels);

  eqrec::SparseRatings out;
  out.n_users = users(rng);
  out.n_items = items(rng);
  int K = n_levels(rng);
  for (int k = 1; k <= K; ++k) out.levels.push_back(k);

  std::uniform_int_distribution<int> level(1, K);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int u = 0; u < out.n_users; ++u) {
    bool any = false;
    for (int i = 0; i < out.n_items; ++i) {
      if (coin(rng) < 0.4) {
        out.observations.push_back(
            {u, i, static_cast<double>(level(rng))});
        any = true;
      }
    }
    if (!any)  // keep every user index occupied
      out.observations.push_back(
          {u, std::uniform_int_distribution<int>(0, out.n_items - 1)(rng),
           static_cast<double>(level(rng))});
  }
  // keep every item index occupied
  std::vector<bool> seen(out.n_items, false);
  for (const auto& o : out.observations) seen[o.item] = true;
  for (int i = 0; i < out.n_items; ++i) {
    if (!seen[i])
      out.observations.push_back(
          {std::uniform_int_distribution<int>(0, out.n_users - 1)(rng), i,
           static_cast<double>(level(rng))});
  }
  for (int u = 0; u < out.n_users; ++u) {
    out.user_ids.push_back(std::to_string(u));
    out.user_id_map.emplace(out.user_ids.back(), u);
  }
  for (int i = 0; i < out.n_items; ++i) {
    out.item_ids.push_back(std::to_string(i));
    out.item_id_map.emplace(out.item_ids.back(), i);
  }
  return out;
}

}  // namespace helpers

#endif
