#include "sadeepdecs/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sadeepdecs/text_io.hpp"

namespace sadeepdecs {

MlpParams MlpParams::zeros(std::span<const std::size_t> widths) {
  if (widths.size() < 2 || widths.back() != 1)
    throw std::invalid_argument("MLP needs at least an input width and a single output");
  MlpParams p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.inputs = widths[l];
    layer.outputs = widths[l + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.bias.assign(layer.outputs, 0.0);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams MlpParams::random(std::span<const std::size_t> widths, std::uint64_t seed) {
  MlpParams p = zeros(widths);
  std::mt19937_64 rng(seed);
  for (auto& layer : p.layers) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(layer.inputs)));
    for (auto& w : layer.weights) w = dist(rng);
  }
  return p;
}

std::vector<std::size_t> MlpParams::widths() const {
  std::vector<std::size_t> w;
  if (layers.empty()) return w;
  w.push_back(layers.front().inputs);
  for (const auto& l : layers) w.push_back(l.outputs);
  return w;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers) {
    for (double w : l.weights)
      if (!std::isfinite(w)) return false;
    for (double b : l.bias)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void MlpParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("MlpParams::assign: size mismatch");
  std::size_t k = 0;
  for (auto& l : layers) {
    for (auto& w : l.weights) w = flat[k++];
    for (auto& b : l.bias) b = flat[k++];
  }
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double bce_from_logit(double z, int y) { return softplus(z) - (y == 1 ? z : 0.0); }

// Scratch buffers for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = output of layer l
  std::vector<std::vector<double>> delta;

  explicit Workspace(const MlpParams& p) {
    act.resize(p.layers.size() + 1);
    delta.resize(p.layers.size());
    act[0].resize(p.layers.front().inputs);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
      act[l + 1].resize(p.layers[l].outputs);
      delta[l].resize(p.layers[l].outputs);
    }
  }
};

double run_forward(const MlpParams& p, Workspace& ws) {
  const std::size_t last = p.layers.size() - 1;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    const auto& in = ws.act[l];
    auto& out = ws.act[l + 1];
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* w = &layer.weights[o * layer.inputs];
      double z = layer.bias[o];
      for (std::size_t i = 0; i < layer.inputs; ++i) z += w[i] * in[i];
      out[o] = l == last ? z : std::max(z, 0.0);
    }
  }
  return ws.act.back()[0];
}

void run_backward(const MlpParams& p, Workspace& ws, double dlogit, double scale, MlpParams& grad) {
  const std::size_t n = p.layers.size();
  ws.delta[n - 1][0] = dlogit;
  for (std::size_t l = n; l-- > 0;) {
    const auto& layer = p.layers[l];
    auto& g = grad.layers[l];
    const auto& in = ws.act[l];
    const auto& d = ws.delta[l];
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double dz = d[o] * scale;
      if (dz == 0.0) continue;
      double* gw = &g.weights[o * layer.inputs];
      for (std::size_t i = 0; i < layer.inputs; ++i) gw[i] += dz * in[i];
      g.bias[o] += dz;
    }
    if (l == 0) break;
    auto& prev = ws.delta[l - 1];
    std::fill(prev.begin(), prev.end(), 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      if (d[o] == 0.0) continue;
      const double* w = &layer.weights[o * layer.inputs];
      for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] += d[o] * w[i];
    }
    // ReLU derivative; hidden activations are exactly zero when inactive
    for (std::size_t i = 0; i < prev.size(); ++i)
      if (ws.act[l][i] <= 0.0) prev[i] = 0.0;
  }
}

void load_input(Workspace& ws, const Features& x) {
  const Features z = standardize(x);
  std::copy(z.begin(), z.end(), ws.act[0].begin());
}

}  // namespace

double mlp_logit(const MlpParams& params, std::span<const double> input) {
  if (params.layers.empty() || input.size() != params.layers.front().inputs)
    throw std::invalid_argument("mlp_logit: input width mismatch");
  Workspace ws(params);
  std::copy(input.begin(), input.end(), ws.act[0].begin());
  return run_forward(params, ws);
}

double forward(const MlpParams& params, const Features& x) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("forward: non-finite input");
  const Features z = standardize(x);
  return sigmoid(mlp_logit(params, z));
}

int predict_label(const MlpParams& params, const Features& x) { return forward(params, x) >= 0.5 ? 1 : 0; }

Predictor make_predictor(std::shared_ptr<const MlpParams> params) {
  return [p = std::move(params)](const Features& x) { return predict_label(*p, x); };
}

double loss_and_gradient(const MlpParams& params, std::span<const Sample> batch, MlpParams* grad) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  Workspace ws(params);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& s : batch) {
    load_input(ws, s.x);
    const double z = run_forward(params, ws);
    total += bce_from_logit(z, s.y);
    if (grad) run_backward(params, ws, sigmoid(z) - static_cast<double>(s.y), scale, *grad);
  }
  return total * scale;
}

double dataset_loss(const MlpParams& params, const Dataset& data) {
  return loss_and_gradient(params, data.samples, nullptr);
}

std::size_t select_best_epoch(std::span<const double> val_losses) {
  if (val_losses.empty()) throw std::invalid_argument("select_best_epoch: no epochs");
  std::size_t best = 0;
  for (std::size_t i = 1; i < val_losses.size(); ++i)
    if (val_losses[i] < val_losses[best]) best = i;
  return best + 1;
}

TrainResult train(const MlpParams& init, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg) {
  if (train_set.empty() || val_set.empty()) throw DatasetError("training needs nonempty train and val sets");
  if (!(cfg.learning_rate > 0.0) || cfg.epochs == 0 || cfg.batch_size == 0)
    throw std::invalid_argument("invalid training configuration");

  MlpParams params = init;
  MlpParams grad = MlpParams::zeros(params.widths());
  std::mt19937_64 rng(cfg.seed);
  std::vector<Sample> shuffled = train_set.samples;

  TrainResult result;
  double best_loss = INFINITY;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t start = 0; start < shuffled.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, shuffled.size() - start);
      for (auto& l : grad.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
      }
      const double loss = loss_and_gradient(params, std::span(shuffled).subspan(start, len), &grad);
      if (!std::isfinite(loss)) throw TrainingDiverged("non-finite training loss in epoch " + std::to_string(epoch));
      for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& p = params.layers[l];
        const auto& g = grad.layers[l];
        for (std::size_t i = 0; i < p.weights.size(); ++i) p.weights[i] -= cfg.learning_rate * g.weights[i];
        for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= cfg.learning_rate * g.bias[i];
      }
    }
    const double val_loss = dataset_loss(params, val_set);
    if (!std::isfinite(val_loss) || !params.all_finite())
      throw TrainingDiverged("non-finite validation loss in epoch " + std::to_string(epoch));
    result.val_losses.push_back(val_loss);
    if (val_loss < best_loss) {
      best_loss = val_loss;
      result.params = params;
    }
  }
  result.best_epoch = select_best_epoch(result.val_losses);
  return result;
}

TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
  return train(MlpParams::random(kDefaultWidths, cfg.seed), train_set, val_set, cfg);
}

Predictor random_guess_predictor(std::uint64_t seed) {
  return [rng = std::mt19937_64(seed)](const Features&) mutable {
    return static_cast<int>(rng() >> 63);
  };
}

std::string serialize_mlp(const MlpParams& params) {
  std::ostringstream out;
  out << "mlp " << params.layers.size() << '\n';
  for (const auto& l : params.layers) {
    out << "dense " << l.inputs << ' ' << l.outputs << '\n';
    for (std::size_t o = 0; o < l.outputs; ++o) {
      for (std::size_t i = 0; i < l.inputs; ++i)
        out << (i ? " " : "") << format_double(l.weights[o * l.inputs + i]);
      out << '\n';
    }
    for (std::size_t o = 0; o < l.outputs; ++o) out << (o ? " " : "") << format_double(l.bias[o]);
    out << '\n';
  }
  return out.str();
}

MlpParams parse_mlp(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "mlp" || count == 0) throw std::invalid_argument("bad MLP header");
  MlpParams p;
  std::string token;
  auto next_number = [&] {
    if (!(in >> token)) throw std::invalid_argument("truncated MLP dump");
    return parse_double(token);
  };
  for (std::size_t k = 0; k < count; ++k) {
    DenseLayer l;
    if (!(in >> tag >> l.inputs >> l.outputs) || tag != "dense")
      throw std::invalid_argument("bad layer header in MLP dump");
    if (!p.layers.empty() && p.layers.back().outputs != l.inputs)
      throw std::invalid_argument("inconsistent layer widths in MLP dump");
    l.weights.resize(l.inputs * l.outputs);
    l.bias.resize(l.outputs);
    for (auto& w : l.weights) w = next_number();
    for (auto& b : l.bias) b = next_number();
    p.layers.push_back(std::move(l));
  }
  if (p.layers.back().outputs != 1) throw std::invalid_argument("MLP must have a single output");
  return p;
}

void save_mlp(const MlpParams& params, const std::filesystem::path& path) {
  write_file(path, serialize_mlp(params));
}

MlpParams load_mlp(const std::filesystem::path& path) { return parse_mlp(read_file(path)); }

}  // namespace sadeepdecs
