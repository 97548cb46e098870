#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sadeepdecs/dataset.hpp"
#include "test_support.hpp"

using namespace sadeepdecs;

namespace {

Dataset numbered(std::size_t n, Role role = Role::Window) {
  Dataset d{role, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.x[0] = static_cast<double>(i);
    s.y = static_cast<int>(i % 2);
    d.samples.push_back(s);
  }
  return d;
}

std::vector<double> keys(const Dataset& d) {
  std::vector<double> k;
  for (const auto& s : d.samples) k.push_back(s.x[0]);
  std::sort(k.begin(), k.end());
  return k;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("split sizes") {
  auto parts = split_counterexamples(numbered(100), {0.4, 0.2, 0.2, 0.2}, 1);
  CHECK(parts[0].size() == 40);
  CHECK(parts[1].size() == 20);
  CHECK(parts[2].size() == 20);
  CHECK(parts[3].size() == 20);
  CHECK(parts[0].role == Role::Train);
  CHECK(parts[3].role == Role::Test);

  parts = split_counterexamples(numbered(10), {0.5, 0.5, 0.0, 0.0}, 1);
  CHECK(parts[0].size() == 5);
  CHECK(parts[1].size() == 5);
  CHECK(parts[2].empty());
  CHECK(parts[3].empty());
}

TEST_CASE("split rejects bad ratios") {
  CHECK_THROWS(split_counterexamples(numbered(10), {0.5, 0.5, 0.5, 0.0}, 1));
  CHECK_THROWS(split_counterexamples(numbered(10), {-0.5, 1.0, 0.5, 0.0}, 1));
}

TEST_CASE("property: split is a partition") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = rng() % 300;
    const Dataset ce = numbered(n);
    const auto parts = split_counterexamples(ce, {0.4, 0.2, 0.2, 0.2}, rng());
    Dataset all{Role::Window, {}};
    for (const auto& p : parts) all.samples.insert(all.samples.end(), p.samples.begin(), p.samples.end());
    CHECK(keys(all) == keys(ce));
  }
}

TEST_CASE("merge") {
  const Dataset base = numbered(4000, Role::Train);
  Dataset ce = numbered(500, Role::Train);
  const Dataset merged = merge_datasets(base, ce);
  CHECK(merged.size() == 4500);
  CHECK(std::equal(base.samples.begin(), base.samples.end(), merged.samples.begin()));
  CHECK(merge_datasets(base, Dataset{Role::Train, {}}).samples == base.samples);
  CHECK_THROWS_AS(merge_datasets(base, numbered(3, Role::Val)), DatasetError);
}

TEST_CASE("sampling") {
  const Dataset src = numbered(50, Role::Train);
  const Dataset perm = sample_dataset(src, 50, 4);
  CHECK(keys(perm) == keys(src));

  const Dataset one = numbered(1, Role::Train);
  CHECK(sample_dataset(one, 1, 9).samples == one.samples);

  const Dataset big = sample_dataset(src, 120, 4);
  CHECK(big.size() == 120);
  std::vector<double> k = keys(big);
  for (double v = 0; v < 50; ++v) CHECK(std::count(k.begin(), k.end(), v) >= 1);

  CHECK_THROWS_AS(sample_dataset(Dataset{Role::Train, {}}, 3, 1), DatasetError);
}

TEST_CASE("single draws from four elements are uniform") {
  const Dataset src = numbered(4, Role::Train);
  std::array<int, 4> counts{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(sample_dataset(src, 1, 1000 + i).samples[0].x[0])]++;
  const double sigma = n * testsupport::binomial_sigma(0.25, n);
  for (int c : counts) CHECK(std::abs(c - 2500.0) <= 3 * sigma);
}

TEST_CASE("input space helpers") {
  Features x{-20, 5, 1, 3, 0};
  CHECK_FALSE(in_input_space(x));
  const Features c = clip_to_input_space(x);
  CHECK(c[0] == -10.0);
  CHECK(c[3] == 2.0);
  CHECK(in_input_space(c));
  Features lo, hi;
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    lo[i] = kInputSpace[i].lo;
    hi[i] = kInputSpace[i].hi;
  }
  for (double v : standardize(lo)) CHECK(v == doctest::Approx(-1.0));
  for (double v : standardize(hi)) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("CSV round trip") {
  const auto path = std::filesystem::temp_directory_path() / "sadeepdecs_dataset_test.csv";
  Dataset d = numbered(7, Role::Val);
  d.samples[3].x = {0.1, 2.0 / 3.0, 1e-17, 1.9999999999, -3.25};
  save_dataset_csv(d, path);
  const Dataset back = load_dataset_csv(path, Role::Val);
  CHECK(back.samples == d.samples);
  std::filesystem::remove(path);
}

}
