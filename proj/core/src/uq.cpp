#include "sadeepdecs/uq.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "sadeepdecs/text_io.hpp"

namespace sadeepdecs {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : k_(classes), counts_(classes * classes, 0) {
  if (classes < 2) throw std::invalid_argument("confusion matrix needs at least two classes");
}

ConfusionMatrix::ConfusionMatrix(std::initializer_list<std::initializer_list<std::uint64_t>> rows)
    : ConfusionMatrix(rows.size()) {
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != k_) throw std::invalid_argument("confusion matrix must be square");
    std::size_t j = 0;
    for (auto v : row) at(i, j++) = v;
    ++i;
  }
}

std::uint64_t& ConfusionMatrix::at(std::size_t truth, std::size_t predicted) {
  if (truth >= k_ || predicted >= k_) throw std::out_of_range("confusion matrix index");
  return counts_[truth * k_ + predicted];
}

std::uint64_t ConfusionMatrix::at(std::size_t truth, std::size_t predicted) const {
  if (truth >= k_ || predicted >= k_) throw std::out_of_range("confusion matrix index");
  return counts_[truth * k_ + predicted];
}

std::uint64_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::uint64_t sum = 0;
  for (std::size_t j = 0; j < k_; ++j) sum += at(truth, j);
  return sum;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < k_; ++i) sum += at(i, i);
  return sum;
}

UncertaintyVector::UncertaintyVector(std::size_t classes, std::vector<double> rates)
    : k_(classes), rates_(std::move(rates)) {
  if (rates_.size() != k_ * k_) throw std::invalid_argument("uncertainty vector size mismatch");
  for (std::size_t i = 0; i < k_; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k_; ++j) {
      const double r = rate(i, j);
      if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("rate outside [0,1]");
      sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("uncertainty row does not sum to 1");
  }
}

UncertaintyVector::UncertaintyVector(double p00, double p01, double p10, double p11)
    : UncertaintyVector(2, {p00, p01, p10, p11}) {}

Valuation UncertaintyVector::as_valuation() const {
  Valuation v;
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = 0; j < k_; ++j)
      v["p" + std::to_string(i) + std::to_string(j)] = rate(i, j);
  return v;
}

ConfusionMatrix evaluate_confusion(const Predictor& predict, const Dataset& data, std::size_t classes) {
  if (data.empty()) throw DatasetError("confusion evaluation needs a nonempty dataset");
  ConfusionMatrix m(classes);
  for (const auto& s : data.samples) {
    const int yhat = predict(s.x);
    if (s.y < 0 || static_cast<std::size_t>(s.y) >= classes || yhat < 0 ||
        static_cast<std::size_t>(yhat) >= classes)
      throw DatasetError("class label out of range");
    ++m.at(static_cast<std::size_t>(s.y), static_cast<std::size_t>(yhat));
  }
  return m;
}

UncertaintyVector quantify(const ConfusionMatrix& matrix) {
  const std::size_t k = matrix.classes();
  std::vector<double> rates(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t total = matrix.row_total(i);
    if (total == 0)
      throw InsufficientSamplesError("no samples of class " + std::to_string(i) +
                                     " in the confusion dataset");
    // the last entry takes the remainder so each row sums to 1 exactly
    double partial = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      rates[i * k + j] = static_cast<double>(matrix.at(i, j)) / static_cast<double>(total);
      partial += rates[i * k + j];
    }
    rates[i * k + k - 1] = std::max(0.0, 1.0 - partial);
  }
  return UncertaintyVector(k, std::move(rates));
}

double accuracy(const Predictor& predict, const Dataset& data) {
  if (data.empty()) throw DatasetError("accuracy of an empty dataset is undefined");
  std::vector<int> predictions, truths;
  predictions.reserve(data.size());
  truths.reserve(data.size());
  for (const auto& s : data.samples) {
    predictions.push_back(predict(s.x));
    truths.push_back(s.y);
  }
  return accuracy(predictions, truths);
}

double accuracy(std::span<const int> predictions, std::span<const int> truths) {
  if (predictions.size() != truths.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (predictions.empty()) throw DatasetError("accuracy of an empty dataset is undefined");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == truths[i];
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

void save_confusion_csv(const ConfusionMatrix& matrix, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t i = 0; i < matrix.classes(); ++i) {
    for (std::size_t j = 0; j < matrix.classes(); ++j) out << (j ? "," : "") << matrix.at(i, j);
    out << '\n';
  }
  write_file(path, out.str());
}

ConfusionMatrix load_confusion_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  ConfusionMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size())
      throw std::invalid_argument(path.string() + ": confusion matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const long long v = parse_integer(rows[i][j]);
      if (v < 0) throw std::invalid_argument(path.string() + ": negative count");
      m.at(i, j) = static_cast<std::uint64_t>(v);
    }
  }
  return m;
}

}  // namespace sadeepdecs
