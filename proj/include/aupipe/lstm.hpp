#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aupipe/core.hpp"
#include "aupipe/dataset.hpp"

namespace aupipe::lstm {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct Config {
  std::size_t input_dim = 0;
  std::size_t hidden_units = 200;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  double weight_noise_std = 0.1;
  bool noise_on_bias = true;
  double grad_clip = 0.0;  // global-norm clip, off when <= 0
  int epochs = 1;
  std::uint64_t seed = 0;
};

/// All parameters of the single-layer net in one flat vector. Block order is
/// fixed (it is also the serialization order): for each gate in (input,
/// forget, cell, output): input-to-hidden H x D row-major, hidden-to-hidden
/// H x H row-major, bias H; then the 2 x H output projection and its bias.
struct Params {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::vector<double> flat;

  Params() = default;
  Params(std::size_t d, std::size_t h)
      : input_dim(d), hidden(h), flat(4 * (h * d + h * h + h) + 2 * h + 2, 0.0) {}

  std::size_t gate_stride() const { return hidden * input_dim + hidden * hidden + hidden; }

  double* w(int gate) { return flat.data() + gate * gate_stride(); }
  double* r(int gate) { return w(gate) + hidden * input_dim; }
  double* b(int gate) { return r(gate) + hidden * hidden; }
  double* wy() { return flat.data() + 4 * gate_stride(); }
  double* by() { return wy() + 2 * hidden; }

  const double* w(int gate) const { return flat.data() + gate * gate_stride(); }
  const double* r(int gate) const { return w(gate) + hidden * input_dim; }
  const double* b(int gate) const { return r(gate) + hidden * hidden; }
  const double* wy() const { return flat.data() + 4 * gate_stride(); }
  const double* by() const { return wy() + 2 * hidden; }
};

enum Gate { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };

/// Per-frame activations kept for backpropagation through time.
struct ForwardCache {
  Matrix gate_i, gate_f, gate_g, gate_o;  // T x H, post-nonlinearity
  Matrix cell, cell_tanh, hidden;         // T x H
  Matrix probs;                           // T x 2 softmax rows
};

struct State {
  std::vector<double> h;
  std::vector<double> c;
};

/// Recurrence from zero initial state with a 2-way softmax per frame.
/// Throws ShapeError on a dimension mismatch, NumericError if an activation
/// goes non-finite.
ForwardCache forward(const Params& params, const Matrix& sequence);

/// Inference-only pass keeping just (h, c); `state` carries across calls so a
/// sequence can be processed in arbitrary chunks. Pass nullptr for a one-shot
/// zero-state run.
Matrix infer(const Params& params, const Matrix& sequence, State* state = nullptr);

/// Mean cross-entropy over frames; the true-class probability is clamped at
/// 1e-12 before the log.
double mean_cross_entropy(const Matrix& probs, std::span<const std::uint8_t> labels);

/// Exact BPTT gradients of mean_cross_entropy(forward(params, seq), labels).
Params backward(const Params& params, const Matrix& sequence, const ForwardCache& cache,
                std::span<const std::uint8_t> labels);

/// Seeded initialization: weights uniform in [-1/sqrt(H), 1/sqrt(H)], biases
/// zero except the forget-gate bias at 1.
Params init_params(const Config& config);

struct TrainResult {
  Params params;                // best-validation checkpoint when a metric is given
  std::vector<double> velocity; // momentum buffer after the final batch
  std::vector<double> loss_history;  // mean per-batch loss per epoch
  int best_epoch = 0;                // 1-based; 0 when no metric was supplied
  double best_metric = 0.0;
};

/// SGD with momentum, one sequence per batch, batch order reshuffled per epoch
/// (seeded). Before each gradient evaluation the parameters are perturbed with
/// zero-mean Gaussian noise of weight_noise_std (biases included only when
/// noise_on_bias); the noise never persists into the parameters. Deterministic
/// for a fixed config.seed. `val_metric`, when given, is evaluated after every
/// epoch and the best checkpoint is returned.
TrainResult train(std::span<const LabeledSequence> sequences, const Config& config,
                  const std::function<double(const Params&)>& val_metric = nullptr);

struct Prediction {
  std::vector<std::uint8_t> votes;
  std::vector<double> scores;  // p(present) - 0.5, so >= 0 means present
};

Prediction predict_sequence(const Params& params, const Matrix& sequence);

// ---- model files ------------------------------------------------------------

/// On disk: magic "AULM", format version u32, header length u32, JSON header
/// (config, AU, epochs, loss history, standardizer), then the flat parameter
/// block as little-endian 64-bit floats in Params order.
struct ModelFile {
  Config config;
  int au = 0;
  std::string network;
  int best_epoch = 0;
  std::vector<double> loss_history;
  StandardizationParams standardizer;
  Params params;
};

void save_model(const std::string& path, const ModelFile& file);
ModelFile load_model(const std::string& path);

}  // namespace aupipe::lstm
