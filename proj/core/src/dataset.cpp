#include "sadeepdecs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sadeepdecs/text_io.hpp"

namespace sadeepdecs {

Features clip_to_input_space(Features x) {
  for (std::size_t i = 0; i < kFeatureDim; ++i) x[i] = std::clamp(x[i], kInputSpace[i].lo, kInputSpace[i].hi);
  return x;
}

bool in_input_space(const Features& x) {
  for (std::size_t i = 0; i < kFeatureDim; ++i)
    if (!(x[i] >= kInputSpace[i].lo && x[i] <= kInputSpace[i].hi)) return false;
  return true;
}

Features standardize(const Features& x) {
  Features z{};
  for (std::size_t i = 0; i < kFeatureDim; ++i)
    z[i] = 2.0 * (x[i] - kInputSpace[i].lo) / kInputSpace[i].width() - 1.0;
  return z;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Train: return "train";
    case Role::Val: return "val";
    case Role::Confusion: return "confusion";
    case Role::Test: return "test";
    case Role::Window: return "window";
  }
  return "?";
}

Role role_from_string(std::string_view text) {
  for (Role r : {Role::Train, Role::Val, Role::Confusion, Role::Test, Role::Window})
    if (to_string(r) == text) return r;
  throw DatasetError("unknown dataset role '" + std::string(text) + "'");
}

std::array<Dataset, 4> split_counterexamples(const Dataset& ce, const std::array<double, 4>& ratios,
                                             std::uint64_t seed) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw DatasetError("split ratios must be nonnegative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DatasetError("split ratios must sum to 1");

  std::vector<std::size_t> order(ce.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n = ce.size();
  std::array<std::size_t, 4> sizes{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    // small epsilon so that e.g. 0.2 * 100 does not floor to 19
    sizes[k] = static_cast<std::size_t>(std::floor(ratios[k] * static_cast<double>(n) + 1e-9));
    assigned += sizes[k];
  }
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 4) {
    if (ratios[k] > 0.0) {
      ++sizes[k];
      ++assigned;
    }
  }

  constexpr std::array<Role, 4> roles{Role::Train, Role::Val, Role::Confusion, Role::Test};
  std::array<Dataset, 4> parts;
  std::size_t next = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    parts[k].role = roles[k];
    parts[k].samples.reserve(sizes[k]);
    for (std::size_t j = 0; j < sizes[k]; ++j) parts[k].samples.push_back(ce.samples[order[next++]]);
  }
  return parts;
}

Dataset merge_datasets(const Dataset& base, const Dataset& part) {
  if (base.role != part.role)
    throw DatasetError("cannot merge " + std::string(to_string(part.role)) + " samples into " +
                       std::string(to_string(base.role)) + " dataset");
  Dataset out = base;
  out.samples.insert(out.samples.end(), part.samples.begin(), part.samples.end());
  return out;
}

Dataset sample_dataset(const Dataset& src, std::size_t n, std::uint64_t seed) {
  if (src.empty()) throw DatasetError("cannot sample from an empty dataset");
  std::mt19937_64 rng(seed);
  Dataset out;
  out.role = src.role;
  out.samples.reserve(n);

  std::vector<std::size_t> order(src.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t without = std::min(n, src.size());
  // partial Fisher-Yates: the first `without` slots become a uniform subset
  for (std::size_t i = 0; i < without; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
    out.samples.push_back(src.samples[order[i]]);
  }
  std::uniform_int_distribution<std::size_t> any(0, src.size() - 1);
  for (std::size_t i = without; i < n; ++i) out.samples.push_back(src.samples[any(rng)]);
  return out;
}

void save_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "x1,x2,x3,x4,x5,y\n";
  for (const auto& s : data.samples) {
    for (double v : s.x) out << format_double(v) << ',';
    out << s.y << '\n';
  }
  write_file(path, out.str());
}

Dataset load_dataset_csv(const std::filesystem::path& path, Role role) {
  auto rows = read_csv(path);
  Dataset data;
  data.role = role;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == 0 && !rows[i].empty() && rows[i][0] == "x1") continue;
    if (rows[i].size() != kFeatureDim + 1)
      throw DatasetError(path.string() + ": row " + std::to_string(i + 1) + " needs 6 columns");
    Sample s;
    for (std::size_t k = 0; k < kFeatureDim; ++k) s.x[k] = parse_double(rows[i][k]);
    s.y = static_cast<int>(parse_integer(rows[i][kFeatureDim]));
    if (s.y != 0 && s.y != 1) throw DatasetError(path.string() + ": labels must be 0 or 1");
    data.samples.push_back(s);
  }
  return data;
}

}  // namespace sadeepdecs
