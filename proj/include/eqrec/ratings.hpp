#ifndef EQREC_RATINGS_HPP
#define EQREC_RATINGS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace eqrec {

struct Observation {
  int user;
  int item;
  double rating;
};

inline bool operator==(const Observation& a, const Observation& b) {
  return a.user == b.user && a.item == b.item && a.rating == b.rating;
}

// Sparse user-item rating matrix. Indices are dense and 0-based; the id maps
// remember the raw dataset identifiers each index came from. At most one
// observation per (user, item) pair, and every rating is one of `levels`.
struct SparseRatings {
  std::vector<Observation> observations;
  int n_users = 0;
  int n_items = 0;
  std::vector<double> levels;  // strictly increasing, non-empty once loaded
  std::unordered_map<std::string, int> user_id_map;  // raw id -> dense index
  std::unordered_map<std::string, int> item_id_map;
  std::vector<std::string> user_ids;  // dense index -> raw id
  std::vector<std::string> item_ids;

  bool empty() const { return observations.empty(); }
  std::size_t size() const { return observations.size(); }
};

// Checks the structural invariants; throws domain_error on violation.
void validate(const SparseRatings& ratings);

// MovieLens 1M format: UserID::MovieID::Rating::Timestamp, rating an
// integer 1-5. Identifiers are re-indexed densely in first-appearance order;
// timestamps are validated and discarded.
SparseRatings load_movielens_1m(const std::string& path);

// Comma-separated file with a header row. Columns are picked by name, extra
// columns are ignored, duplicate (user,item) rows keep the last occurrence.
// Levels become the sorted distinct observed ratings.
SparseRatings load_comoda_csv(const std::string& path,
                              const std::string& user_col,
                              const std::string& item_col,
                              const std::string& rating_col);

// Fixture format: `user,item,rating` with that exact header, indices stored
// literally (no re-densification). Values written by save_ratings_csv parse
// back bit-exact.
SparseRatings load_ratings_csv(const std::string& path);
void save_ratings_csv(const SparseRatings& ratings, const std::string& path);

struct Split {
  SparseRatings train;
  SparseRatings test;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
};

// Seeded global shuffle; the first ceil(N * test_fraction) observations form
// the test set. Train and test share the source's n_users/n_items/levels and
// id maps, so users or items can be absent from either side.
Split split(const SparseRatings& ratings, double test_fraction,
            std::uint64_t seed);

}  // namespace eqrec

#endif
