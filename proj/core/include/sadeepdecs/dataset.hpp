#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sadeepdecs {

inline constexpr std::size_t kFeatureDim = 5;

/// Collider state relative to the moving robot: position (x1, x2), heading
/// x3 [rad], speed x4 [units/s], angular velocity x5 [rad/s].
using Features = std::array<double, kFeatureDim>;

struct Interval {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

/// Bounds of the operational input space.
inline constexpr std::array<Interval, kFeatureDim> kInputSpace{{
    {-10.0, 10.0},
    {0.0, 10.0},
    {0.0, 2.0 * std::numbers::pi},
    {0.0, 2.0},
    {-std::numbers::pi / 2.0, std::numbers::pi / 2.0},
}};

Features clip_to_input_space(Features x);
bool in_input_space(const Features& x);
/// Fixed affine map of each input range onto [-1, 1].
Features standardize(const Features& x);

struct Sample {
  Features x{};
  int y = 0;
  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class Role { Train, Val, Confusion, Test, Window };
std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct Dataset {
  Role role = Role::Train;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Hard-label classifier. May carry state (e.g. a seeded coin).
using Predictor = std::function<int(const Features&)>;

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shuffles `ce` with `seed` and partitions it into train/val/confusion/test
/// parts of size floor(ratio * n); leftover samples go one each to the
/// parts with nonzero ratio, in declaration order.
std::array<Dataset, 4> split_counterexamples(const Dataset& ce, const std::array<double, 4>& ratios,
                                             std::uint64_t seed);

/// `base` followed by `part`. Both must share a role.
Dataset merge_datasets(const Dataset& base, const Dataset& part);

/// `n` samples from `src`: without replacement while n <= |src|, otherwise
/// all of `src` plus a with-replacement remainder.
Dataset sample_dataset(const Dataset& src, std::size_t n, std::uint64_t seed);

/// CSV with header `x1,x2,x3,x4,x5,y`.
void save_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset_csv(const std::filesystem::path& path, Role role);

}  // namespace sadeepdecs
