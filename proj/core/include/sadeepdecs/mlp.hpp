#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sadeepdecs/dataset.hpp"

namespace sadeepdecs {

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;     // outputs

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feed-forward binary classifier: ReLU hidden layers, one sigmoid output.
struct MlpParams {
  std::vector<DenseLayer> layers;

  static MlpParams zeros(std::span<const std::size_t> widths);
  /// He-normal weights, zero biases.
  static MlpParams random(std::span<const std::size_t> widths, std::uint64_t seed);

  std::vector<std::size_t> widths() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
  /// Parameters flattened layer by layer (weights, then bias).
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

inline constexpr std::size_t kDefaultWidths[] = {kFeatureDim, 32, 32, 1};

/// Pre-sigmoid output on an already standardized input.
double mlp_logit(const MlpParams& params, std::span<const double> input);

/// P(class 1 | x) on a raw collider state (standardized internally).
/// Throws std::invalid_argument on non-finite input.
double forward(const MlpParams& params, const Features& x);
int predict_label(const MlpParams& params, const Features& x);
Predictor make_predictor(std::shared_ptr<const MlpParams> params);

/// Mean binary cross-entropy over `batch`; accumulates d(loss)/d(params)
/// into `grad` when non-null (grad must have the same shape).
double loss_and_gradient(const MlpParams& params, std::span<const Sample> batch, MlpParams* grad);
double dataset_loss(const MlpParams& params, const Dataset& data);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
};

struct TrainResult {
  MlpParams params;
  std::size_t best_epoch = 0;        // 1-based
  std::vector<double> val_losses;    // one per epoch
};

/// 1-based index of the smallest loss; ties go to the earliest epoch.
std::size_t select_best_epoch(std::span<const double> val_losses);

/// Minibatch SGD on `train`; after every epoch the validation loss is
/// recorded and the snapshot with the lowest one is returned.
TrainResult train(const MlpParams& init, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg);
TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg);

/// Coin-flip classifier: 0 or 1 with probability 1/2 each.
Predictor random_guess_predictor(std::uint64_t seed);

/// Text dump: `mlp <layers>` header, then per layer `dense <in> <out>`
/// followed by the weights row by row and the bias on one line.
void save_mlp(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_mlp(const std::filesystem::path& path);
std::string serialize_mlp(const MlpParams& params);
MlpParams parse_mlp(const std::string& text);

}  // namespace sadeepdecs
