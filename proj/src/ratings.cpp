#include "eqrec/ratings.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "eqrec/errors.hpp"

namespace eqrec {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_on(const std::string& line,
                                  const std::string& sep) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return fields;
}

bool parse_long(const std::string& s, long long& out) {
  if (s.empty()) return false;
  std::size_t idx = 0;
  try {
    out = std::stoll(s, &idx);
  } catch (const std::exception&) {
    return false;
  }
  return idx == s.size();
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t idx = 0;
  try {
    out = std::stod(s, &idx);
  } catch (const std::exception&) {
    return false;
  }
  return idx == s.size();
}

int intern(const std::string& raw, std::unordered_map<std::string, int>& map,
           std::vector<std::string>& ids) {
  auto it = map.find(raw);
  if (it != map.end()) return it->second;
  int index = static_cast<int>(ids.size());
  map.emplace(raw, index);
  ids.push_back(raw);
  return index;
}

std::vector<double> distinct_sorted_ratings(
    const std::vector<Observation>& obs) {
  std::set<double> values;
  for (const auto& o : obs) values.insert(o.rating);
  return {values.begin(), values.end()};
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  return in;
}

}  // namespace

void validate(const SparseRatings& r) {
  if (r.levels.empty()) throw domain_error("levels must be non-empty");
  for (std::size_t k = 1; k < r.levels.size(); ++k)
    if (!(r.levels[k - 1] < r.levels[k]))
      throw domain_error("levels must be strictly increasing");
  std::set<std::pair<int, int>> seen;
  for (const auto& o : r.observations) {
    if (o.user < 0 || o.user >= r.n_users)
      throw domain_error("user index out of range");
    if (o.item < 0 || o.item >= r.n_items)
      throw domain_error("item index out of range");
    if (!std::binary_search(r.levels.begin(), r.levels.end(), o.rating))
      throw domain_error("rating not a member of levels");
    if (!seen.insert({o.user, o.item}).second)
      throw domain_error("duplicate (user,item) observation");
  }
}

SparseRatings load_movielens_1m(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  SparseRatings out;
  out.levels = {1.0, 2.0, 3.0, 4.0, 5.0};

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_on(line, "::");
    if (fields.size() != 4)
      throw parse_error("expected 4 '::'-separated fields", lineno);
    long long user_id, movie_id, rating_value, timestamp;
    if (!parse_long(fields[0], user_id))
      throw parse_error("non-numeric UserID '" + fields[0] + "'", lineno);
    if (!parse_long(fields[1], movie_id))
      throw parse_error("non-numeric MovieID '" + fields[1] + "'", lineno);
    if (!parse_long(fields[2], rating_value))
      throw parse_error("non-numeric Rating '" + fields[2] + "'", lineno);
    if (!parse_long(fields[3], timestamp))
      throw parse_error("non-numeric Timestamp '" + fields[3] + "'", lineno);
    if (rating_value < 1 || rating_value > 5)
      throw parse_error("rating " + std::to_string(rating_value) +
                            " outside 1-5",
                        lineno);
    int u = intern(fields[0], out.user_id_map, out.user_ids);
    int i = intern(fields[1], out.item_id_map, out.item_ids);
    out.observations.push_back({u, i, static_cast<double>(rating_value)});
  }
  if (out.observations.empty())
    throw empty_input_error("no ratings in " + path);
  out.n_users = static_cast<int>(out.user_ids.size());
  out.n_items = static_cast<int>(out.item_ids.size());
  return out;
}

SparseRatings load_comoda_csv(const std::string& path,
                              const std::string& user_col,
                              const std::string& item_col,
                              const std::string& rating_col) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line))
    throw schema_error("missing header row in " + path);
  strip_cr(line);
  auto header = split_on(line, ",");
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw schema_error("column '" + name + "' not found in header of " +
                         path);
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t uc = column(user_col), ic = column(item_col),
              rc = column(rating_col);

  SparseRatings out;
  // Keep-last for duplicate (user,item) rows: remember the winning slot.
  std::unordered_map<long long, std::size_t> slot_of_pair;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_on(line, ",");
    std::size_t needed = std::max({uc, ic, rc}) + 1;
    if (fields.size() < needed)
      throw parse_error("row has " + std::to_string(fields.size()) +
                            " fields, need " + std::to_string(needed),
                        lineno);
    double rating;
    if (!parse_double(fields[rc], rating))
      throw parse_error("non-numeric rating '" + fields[rc] + "'", lineno);
    int u = intern(fields[uc], out.user_id_map, out.user_ids);
    int i = intern(fields[ic], out.item_id_map, out.item_ids);
    long long key = static_cast<long long>(u) * (1LL << 31) + i;
    auto it = slot_of_pair.find(key);
    if (it != slot_of_pair.end()) {
      out.observations[it->second].rating = rating;
    } else {
      slot_of_pair.emplace(key, out.observations.size());
      out.observations.push_back({u, i, rating});
    }
  }
  if (out.observations.empty())
    throw empty_input_error("no data rows in " + path);
  out.n_users = static_cast<int>(out.user_ids.size());
  out.n_items = static_cast<int>(out.item_ids.size());
  out.levels = distinct_sorted_ratings(out.observations);
  return out;
}

SparseRatings load_ratings_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line))
    throw schema_error("missing header row in " + path);
  strip_cr(line);
  if (line != "user,item,rating")
    throw schema_error("expected 'user,item,rating' header in " + path);

  SparseRatings out;
  std::size_t lineno = 1;
  long long max_user = -1, max_item = -1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_on(line, ",");
    if (fields.size() != 3) throw parse_error("expected 3 fields", lineno);
    long long u, i;
    double rating;
    if (!parse_long(fields[0], u) || u < 0)
      throw parse_error("bad user index '" + fields[0] + "'", lineno);
    if (!parse_long(fields[1], i) || i < 0)
      throw parse_error("bad item index '" + fields[1] + "'", lineno);
    if (!parse_double(fields[2], rating))
      throw parse_error("non-numeric rating '" + fields[2] + "'", lineno);
    max_user = std::max(max_user, u);
    max_item = std::max(max_item, i);
    out.observations.push_back(
        {static_cast<int>(u), static_cast<int>(i), rating});
  }
  if (out.observations.empty())
    throw empty_input_error("no data rows in " + path);
  out.n_users = static_cast<int>(max_user + 1);
  out.n_items = static_cast<int>(max_item + 1);
  out.user_ids.resize(out.n_users);
  out.item_ids.resize(out.n_items);
  for (int u = 0; u < out.n_users; ++u) {
    out.user_ids[u] = std::to_string(u);
    out.user_id_map.emplace(out.user_ids[u], u);
  }
  for (int i = 0; i < out.n_items; ++i) {
    out.item_ids[i] = std::to_string(i);
    out.item_id_map.emplace(out.item_ids[i], i);
  }
  out.levels = distinct_sorted_ratings(out.observations);
  return out;
}

void save_ratings_csv(const SparseRatings& ratings, const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw io_error("cannot write " + path);
  outf << "user,item,rating\n";
  char buf[64];
  for (const auto& o : ratings.observations) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g", o.user, o.item, o.rating);
    outf << buf << '\n';
  }
  if (!outf) throw io_error("write failed for " + path);
}

Split split(const SparseRatings& ratings, double test_fraction,
            std::uint64_t seed) {
  if (ratings.empty()) throw empty_input_error("cannot split empty ratings");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw domain_error("test_fraction must lie in (0,1)");

  const std::size_t n = ratings.size();
  // Epsilon guards against ceil(10 * 0.2) landing on 3.
  const auto n_test = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n) * test_fraction - 1e-9));

  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> in_test(n, false);
  for (std::size_t k = 0; k < n_test && k < n; ++k) in_test[order[k]] = true;

  Split out;
  out.seed = seed;
  out.test_fraction = test_fraction;
  auto copy_shell = [&](SparseRatings& dst) {
    dst.n_users = ratings.n_users;
    dst.n_items = ratings.n_items;
    dst.levels = ratings.levels;
    dst.user_id_map = ratings.user_id_map;
    dst.item_id_map = ratings.item_id_map;
    dst.user_ids = ratings.user_ids;
    dst.item_ids = ratings.item_ids;
  };
  copy_shell(out.train);
  copy_shell(out.test);
  for (std::size_t k = 0; k < n; ++k) {
    (in_test[k] ? out.test : out.train)
        .observations.push_back(ratings.observations[k]);
  }
  return out;
}

}  // namespace eqrec
