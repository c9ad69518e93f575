#include "eqrec/equalize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "eqrec/errors.hpp"

namespace eqrec {

RatingHistogram build_histogram(const SparseRatings& ratings) {
  if (ratings.empty())
    throw empty_input_error("cannot build histogram of empty ratings");
  std::map<double, std::int64_t> counts;
  for (const auto& o : ratings.observations) ++counts[o.rating];

  RatingHistogram hist;
  hist.total = static_cast<std::int64_t>(ratings.size());
  for (const auto& [level, count] : counts) {
    hist.levels.push_back(level);
    hist.counts.push_back(count);
    hist.frequencies.push_back(static_cast<double>(count) /
                               static_cast<double>(hist.total));
  }
  return hist;
}

EqualizationMap build_equalization_map(const RatingHistogram& hist,
                                       double r_max) {
  if (!(r_max > 0.0)) throw domain_error("r_max must be positive");
  if (hist.levels.empty()) throw empty_input_error("empty histogram");

  EqualizationMap map;
  map.levels = hist.levels;
  map.r_max = r_max;
  map.transformed.resize(hist.levels.size());
  // Integer prefix sums keep the CDF exact; the last level lands on r_max
  // with no accumulated rounding.
  std::int64_t cumulative = 0;
  for (std::size_t k = 0; k < hist.levels.size(); ++k) {
    cumulative += hist.counts[k];
    map.transformed[k] = r_max * (static_cast<double>(cumulative) /
                                  static_cast<double>(hist.total));
  }
  return map;
}

namespace {

// Index of the level nearest to `value`, ties toward the lower level.
std::size_t nearest_level_index(const std::vector<double>& levels,
                                double value) {
  std::size_t best = 0;
  double best_dist = std::abs(value - levels[0]);
  for (std::size_t k = 1; k < levels.size(); ++k) {
    double dist = std::abs(value - levels[k]);
    if (dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

SparseRatings apply(const EqualizationMap& map, const SparseRatings& ratings,
                    bool nearest_level_fallback) {
  if (ratings.empty())
    throw empty_input_error("cannot equalize empty ratings");

  SparseRatings out;
  out.n_users = ratings.n_users;
  out.n_items = ratings.n_items;
  out.user_id_map = ratings.user_id_map;
  out.item_id_map = ratings.item_id_map;
  out.user_ids = ratings.user_ids;
  out.item_ids = ratings.item_ids;
  out.observations.reserve(ratings.size());

  for (const auto& o : ratings.observations) {
    auto it = std::lower_bound(map.levels.begin(), map.levels.end(), o.rating);
    std::size_t k;
    if (it != map.levels.end() && *it == o.rating) {
      k = static_cast<std::size_t>(it - map.levels.begin());
    } else if (nearest_level_fallback) {
      k = nearest_level_index(map.levels, o.rating);
    } else {
      throw unknown_level_error(o.rating);
    }
    out.observations.push_back({o.user, o.item, map.transformed[k]});
  }
  out.levels = map.transformed;  // already sorted ascending
  return out;
}

double invert(const EqualizationMap& map, double value) {
  const auto& t = map.transformed;
  const auto& l = map.levels;
  if (value <= t.front()) {
    // Everything at or below the first transformed value reads as the first
    // level; there is no mass below it to interpolate against.
    return l.front();
  }
  if (value >= t.back()) return l.back();
  // Find the segment [t[k], t[k+1]) containing value.
  auto it = std::upper_bound(t.begin(), t.end(), value);
  std::size_t hi = static_cast<std::size_t>(it - t.begin());
  std::size_t lo = hi - 1;
  if (t[lo] == value) return l[lo];
  double frac = (value - t[lo]) / (t[hi] - t[lo]);
  return l[lo] + frac * (l[hi] - l[lo]);
}

void save_equalization_map(const EqualizationMap& map,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  char buf[96];
  std::snprintf(buf, sizeof buf, "r_max,%.17g", map.r_max);
  out << buf << "\nlevel,transformed\n";
  for (std::size_t k = 0; k < map.levels.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", map.levels[k],
                  map.transformed[k]);
    out << buf << '\n';
  }
  if (!out) throw io_error("write failed for " + path);
}

EqualizationMap load_equalization_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("r_max,", 0) != 0)
    throw schema_error("expected 'r_max,<value>' first line in " + path);
  EqualizationMap map;
  map.r_max = std::stod(line.substr(6));
  if (!std::getline(in, line) ||
      (line != "level,transformed" && line != "level,transformed\r"))
    throw schema_error("expected 'level,transformed' header in " + path);
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw parse_error("expected 'level,transformed' pair", lineno);
    try {
      map.levels.push_back(std::stod(line.substr(0, comma)));
      map.transformed.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw parse_error("non-numeric map entry", lineno);
    }
  }
  if (map.levels.empty()) throw empty_input_error("no map rows in " + path);
  return map;
}

}  // namespace eqrec
