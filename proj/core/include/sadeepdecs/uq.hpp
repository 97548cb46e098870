#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "sadeepdecs/dataset.hpp"
#include "sadeepdecs/expr.hpp"

namespace sadeepdecs {

class InsufficientSamplesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// k x k counts; entry (i, j) = samples of true class i predicted as j.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 2);
  ConfusionMatrix(std::initializer_list<std::initializer_list<std::uint64_t>> rows);

  std::size_t classes() const { return k_; }
  std::uint64_t& at(std::size_t truth, std::size_t predicted);
  std::uint64_t at(std::size_t truth, std::size_t predicted) const;
  std::uint64_t row_total(std::size_t truth) const;
  std::uint64_t total() const;
  std::uint64_t trace() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> counts_;
};

/// Row-normalized misclassification rates; rate(i, j) is the probability
/// that a class-i input is predicted as j.
class UncertaintyVector {
 public:
  explicit UncertaintyVector(std::size_t classes, std::vector<double> rates);
  /// Binary shorthand (p00, p01, p10, p11).
  UncertaintyVector(double p00, double p01, double p10, double p11);

  std::size_t classes() const { return k_; }
  double rate(std::size_t truth, std::size_t predicted) const { return rates_[truth * k_ + predicted]; }
  std::span<const double> rates() const { return rates_; }

  /// Parameter bindings "p<i><j>" for chain instantiation.
  Valuation as_valuation() const;

 private:
  std::size_t k_;
  std::vector<double> rates_;
};

/// Runs `predict` over `data` once per sample, in order.
ConfusionMatrix evaluate_confusion(const Predictor& predict, const Dataset& data,
                                   std::size_t classes = 2);

/// p_ik = C_ik / sum_j C_ij. Throws InsufficientSamplesError on an empty row.
UncertaintyVector quantify(const ConfusionMatrix& matrix);

/// Fraction of samples whose prediction equals the label.
double accuracy(const Predictor& predict, const Dataset& data);
double accuracy(std::span<const int> predictions, std::span<const int> truths);

void save_confusion_csv(const ConfusionMatrix& matrix, const std::filesystem::path& path);
ConfusionMatrix load_confusion_csv(const std::filesystem::path& path);

}  // namespace sadeepdecs
