#ifndef EQREC_EQUALIZE_HPP
#define EQREC_EQUALIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "eqrec/ratings.hpp"

namespace eqrec {

// Per-level counts over observed entries only. Zero-count levels are dropped,
// so every stored frequency is positive and they sum to 1.
struct RatingHistogram {
  std::vector<double> levels;        // strictly increasing
  std::vector<std::int64_t> counts;  // positive, aligned with levels
  std::vector<double> frequencies;   // counts[k] / total
  std::int64_t total = 0;
};

// Monotone level -> value mapping: transformed[k] is r_max times the
// cumulative frequency through level k, so transformed.back() == r_max
// exactly and the whole map is strictly increasing.
struct EqualizationMap {
  std::vector<double> levels;
  std::vector<double> transformed;
  double r_max = 0.0;
};

RatingHistogram build_histogram(const SparseRatings& ratings);

EqualizationMap build_equalization_map(const RatingHistogram& hist,
                                       double r_max);

// Replaces each observation's rating with its transformed value. The output's
// levels become the sorted transformed values. A rating absent from the map
// throws unknown_level_error unless nearest-level fallback is enabled
// (nearest by absolute distance, ties toward the lower level).
SparseRatings apply(const EqualizationMap& map, const SparseRatings& ratings,
                    bool nearest_level_fallback = false);

// Continuous monotone inverse of the level -> transformed graph: exact at the
// knots, linear between them, clamped to [levels.front(), levels.back()]
// outside the transformed range.
double invert(const EqualizationMap& map, double value);

// Two-column CSV (level, transformed) preceded by an `r_max,<value>` line.
void save_equalization_map(const EqualizationMap& map, const std::string& path);
EqualizationMap load_equalization_map(const std::string& path);

}  // namespace eqrec

#endif
