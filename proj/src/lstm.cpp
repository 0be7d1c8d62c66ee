#include "aupipe/lstm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "aupipe/kernels.hpp"
#include "aupipe/rng.hpp"

namespace aupipe::lstm {

namespace {

// Sub-seed streams so initialization, batch order and weight noise stay
// independent of each other.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kOrderStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void check_input(const Params& params, const Matrix& sequence, const char* op) {
  if (sequence.rows == 0) throw ShapeError(std::string(op) + ": empty sequence");
  if (sequence.cols != params.input_dim) {
    throw ShapeError(std::string(op) + ": sequence dimension " + std::to_string(sequence.cols) +
                     " vs input_dim " + std::to_string(params.input_dim));
  }
}

// One cell step. Reads h_prev/c_prev, writes the per-gate activations and the
// new cell/hidden state; all buffers are length H except probs (length 2).
void cell_step(const Params& params, const double* x, const double* h_prev, const double* c_prev,
               double* gi, double* gf, double* gg, double* go, double* c, double* c_tanh,
               double* h, double* probs) {
  const std::size_t hid = params.hidden;
  const std::size_t dim = params.input_dim;
  double* const pre[4] = {gi, gf, gg, go};
  for (int gate = 0; gate < 4; ++gate) {
    kernels::matvec_bias(params.w(gate), hid, dim, x, params.b(gate), pre[gate]);
    kernels::matvec_acc(params.r(gate), hid, hid, h_prev, pre[gate]);
  }
  for (std::size_t k = 0; k < hid; ++k) {
    gi[k] = sigmoid(gi[k]);
    gf[k] = sigmoid(gf[k]);
    gg[k] = std::tanh(gg[k]);
    go[k] = sigmoid(go[k]);
    c[k] = gf[k] * c_prev[k] + gi[k] * gg[k];
    c_tanh[k] = std::tanh(c[k]);
    h[k] = go[k] * c_tanh[k];
    if (!std::isfinite(h[k]) || !std::isfinite(c[k])) {
      throw NumericError("lstm: non-finite activation");
    }
  }
  double logits[2];
  kernels::matvec_bias(params.wy(), 2, hid, h, params.by(), logits);
  const double peak = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - peak);
  const double e1 = std::exp(logits[1] - peak);
  probs[0] = e0 / (e0 + e1);
  probs[1] = e1 / (e0 + e1);
}

// Applies fn(offset, length, is_bias) over the flat layout in order.
template <typename Fn>
void for_each_block(const Params& params, Fn&& fn) {
  const std::size_t d = params.input_dim;
  const std::size_t h = params.hidden;
  std::size_t off = 0;
  for (int gate = 0; gate < 4; ++gate) {
    fn(off, h * d, false);
    off += h * d;
    fn(off, h * h, false);
    off += h * h;
    fn(off, h, true);
    off += h;
  }
  fn(off, 2 * h, false);
  off += 2 * h;
  fn(off, std::size_t{2}, true);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated model file: " + path);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

}  // namespace

ForwardCache forward(const Params& params, const Matrix& sequence) {
  check_input(params, sequence, "lstm forward");
  const std::size_t steps = sequence.rows;
  const std::size_t hid = params.hidden;
  ForwardCache cache;
  for (Matrix* m : {&cache.gate_i, &cache.gate_f, &cache.gate_g, &cache.gate_o, &cache.cell,
                    &cache.cell_tanh, &cache.hidden}) {
    *m = Matrix(steps, hid);
  }
  cache.probs = Matrix(steps, 2);
  const std::vector<double> zeros(hid, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* h_prev = t == 0 ? zeros.data() : cache.hidden.row(t - 1);
    const double* c_prev = t == 0 ? zeros.data() : cache.cell.row(t - 1);
    cell_step(params, sequence.row(t), h_prev, c_prev, cache.gate_i.row(t), cache.gate_f.row(t),
              cache.gate_g.row(t), cache.gate_o.row(t), cache.cell.row(t),
              cache.cell_tanh.row(t), cache.hidden.row(t), cache.probs.row(t));
  }
  return cache;
}

Matrix infer(const Params& params, const Matrix& sequence, State* state) {
  check_input(params, sequence, "lstm infer");
  const std::size_t hid = params.hidden;
  std::vector<double> h(hid, 0.0), c(hid, 0.0);
  if (state) {
    if (state->h.empty()) {
      state->h.assign(hid, 0.0);
      state->c.assign(hid, 0.0);
    }
    if (state->h.size() != hid || state->c.size() != hid) {
      throw ShapeError("lstm infer: carried state has the wrong width");
    }
    h = state->h;
    c = state->c;
  }
  Matrix probs(sequence.rows, 2);
  std::vector<double> gi(hid), gf(hid), gg(hid), go(hid), c_new(hid), c_tanh(hid), h_new(hid);
  for (std::size_t t = 0; t < sequence.rows; ++t) {
    cell_step(params, sequence.row(t), h.data(), c.data(), gi.data(), gf.data(), gg.data(),
              go.data(), c_new.data(), c_tanh.data(), h_new.data(), probs.row(t));
    h = h_new;
    c = c_new;
  }
  if (state) {
    state->h = h;
    state->c = c;
  }
  return probs;
}

double mean_cross_entropy(const Matrix& probs, std::span<const std::uint8_t> labels) {
  if (probs.rows != labels.size() || probs.cols != 2) {
    throw ShapeError("mean_cross_entropy: scores must be T x 2 with T labels");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < probs.rows; ++t) {
    const double p = probs(t, labels[t] ? 1 : 0);
    total += -std::log(std::max(p, 1e-12));
  }
  return total / static_cast<double>(probs.rows);
}

Params backward(const Params& params, const Matrix& sequence, const ForwardCache& cache,
                std::span<const std::uint8_t> labels) {
  check_input(params, sequence, "lstm backward");
  if (cache.probs.rows != sequence.rows || labels.size() != sequence.rows) {
    throw ShapeError("lstm backward: cache/labels do not match the sequence length");
  }
  const std::size_t steps = sequence.rows;
  const std::size_t hid = params.hidden;
  const double inv_steps = 1.0 / static_cast<double>(steps);

  Params grads(params.input_dim, params.hidden);
  std::vector<double> dh(hid), dc(hid), rec_dh(hid, 0.0), rec_dc(hid, 0.0);
  std::vector<double> dpre_i(hid), dpre_f(hid), dpre_g(hid), dpre_o(hid);
  const std::vector<double> zeros(hid, 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    // Softmax + cross-entropy: dlogit = (p - onehot) / T.
    double dlogit[2] = {cache.probs(t, 0) * inv_steps, cache.probs(t, 1) * inv_steps};
    dlogit[labels[t] ? 1 : 0] -= inv_steps;

    const double* h_t = cache.hidden.row(t);
    kernels::ger_acc(grads.wy(), 2, hid, dlogit, h_t);
    grads.by()[0] += dlogit[0];
    grads.by()[1] += dlogit[1];

    // dh = Wy^T dlogit + recurrent contribution from t+1.
    for (std::size_t k = 0; k < hid; ++k) {
      dh[k] = params.wy()[k] * dlogit[0] + params.wy()[hid + k] * dlogit[1] + rec_dh[k];
    }

    const double* gi = cache.gate_i.row(t);
    const double* gf = cache.gate_f.row(t);
    const double* gg = cache.gate_g.row(t);
    const double* go = cache.gate_o.row(t);
    const double* c_tanh = cache.cell_tanh.row(t);
    const double* c_prev = t == 0 ? zeros.data() : cache.cell.row(t - 1);
    for (std::size_t k = 0; k < hid; ++k) {
      dc[k] = dh[k] * go[k] * (1.0 - c_tanh[k] * c_tanh[k]) + rec_dc[k];
      dpre_i[k] = dc[k] * gg[k] * gi[k] * (1.0 - gi[k]);
      dpre_f[k] = dc[k] * c_prev[k] * gf[k] * (1.0 - gf[k]);
      dpre_g[k] = dc[k] * gi[k] * (1.0 - gg[k] * gg[k]);
      dpre_o[k] = dh[k] * c_tanh[k] * go[k] * (1.0 - go[k]);
    }

    const double* h_prev = t == 0 ? zeros.data() : cache.hidden.row(t - 1);
    const double* x_t = sequence.row(t);
    const double* dpre[4] = {dpre_i.data(), dpre_f.data(), dpre_g.data(), dpre_o.data()};
    std::fill(rec_dh.begin(), rec_dh.end(), 0.0);
    for (int gate = 0; gate < 4; ++gate) {
      kernels::ger_acc(grads.w(gate), hid, params.input_dim, dpre[gate], x_t);
      kernels::ger_acc(grads.r(gate), hid, hid, dpre[gate], h_prev);
      double* gb = grads.b(gate);
      for (std::size_t k = 0; k < hid; ++k) gb[k] += dpre[gate][k];
      kernels::matvec_t_acc(params.r(gate), hid, hid, dpre[gate], rec_dh.data());
    }
    for (std::size_t k = 0; k < hid; ++k) rec_dc[k] = dc[k] * gf[k];
  }
  return grads;
}

Params init_params(const Config& config) {
  if (config.input_dim == 0 || config.hidden_units == 0) {
    throw ValidationError("lstm init: input_dim and hidden_units must be positive");
  }
  Params params(config.input_dim, config.hidden_units);
  Rng rng(mix_seed(config.seed, kInitStream));
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden_units));
  for_each_block(params, [&](std::size_t off, std::size_t len, bool is_bias) {
    for (std::size_t k = 0; k < len; ++k) {
      params.flat[off + k] = is_bias ? 0.0 : (2.0 * rng.uniform01() - 1.0) * bound;
    }
  });
  double* forget_bias = params.b(kForget);
  std::fill(forget_bias, forget_bias + config.hidden_units, 1.0);
  return params;
}

TrainResult train(std::span<const LabeledSequence> sequences, const Config& config,
                  const std::function<double(const Params&)>& val_metric) {
  if (sequences.empty()) throw InsufficientDataError("lstm train: no sequences");
  if (config.learning_rate < 0.0 || config.momentum < 0.0 || config.momentum >= 1.0 ||
      config.weight_noise_std < 0.0 || config.epochs <= 0) {
    throw ValidationError("lstm train: invalid hyperparameters");
  }
  for (const LabeledSequence& seq : sequences) {
    if (seq.features.cols != config.input_dim) {
      throw ShapeError("lstm train: sequence dimension " + std::to_string(seq.features.cols) +
                       " vs input_dim " + std::to_string(config.input_dim));
    }
    if (seq.features.rows != seq.labels.size() || seq.labels.empty()) {
      throw ShapeError("lstm train: sequence with mismatched or empty labels");
    }
  }

  TrainResult result;
  result.params = init_params(config);
  Params& params = result.params;
  const std::size_t count = params.flat.size();
  result.velocity.assign(count, 0.0);

  Rng order_rng(mix_seed(config.seed, kOrderStream));
  Rng noise_rng(mix_seed(config.seed, kNoiseStream));
  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Params best;
  double best_metric = -std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  std::vector<double> noisy(count);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t batch = 0; batch < order.size(); ++batch) {
      const LabeledSequence& seq = sequences[order[batch]];

      // Gradient is taken at (params + noise); the noise is discarded after.
      Params noisy_params;
      if (config.weight_noise_std > 0.0) {
        noisy = params.flat;
        for_each_block(params, [&](std::size_t off, std::size_t len, bool is_bias) {
          if (is_bias && !config.noise_on_bias) return;
          for (std::size_t k = 0; k < len; ++k) {
            noisy[off + k] += config.weight_noise_std * noise_rng.normal();
          }
        });
        noisy_params.input_dim = params.input_dim;
        noisy_params.hidden = params.hidden;
        noisy_params.flat = std::move(noisy);
      }
      const Params& grad_point = config.weight_noise_std > 0.0 ? noisy_params : params;

      double loss = 0.0;
      Params grads;
      try {
        const ForwardCache cache = forward(grad_point, seq.features);
        loss = mean_cross_entropy(cache.probs, seq.labels);
        if (!std::isfinite(loss)) throw NumericError("non-finite loss");
        grads = backward(grad_point, seq.features, cache, seq.labels);
      } catch (const NumericError& e) {
        throw NumericError("lstm train: " + std::string(e.what()) + " (epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(batch) +
                           ", loss " + std::to_string(loss) + ")");
      }
      loss_sum += loss;
      if (config.weight_noise_std > 0.0) noisy = std::move(noisy_params.flat);

      if (config.grad_clip > 0.0) {
        const double norm =
            std::sqrt(kernels::dot(grads.flat.data(), grads.flat.data(), count));
        if (norm > config.grad_clip) {
          const double scale = config.grad_clip / norm;
          for (double& g : grads.flat) g *= scale;
        }
      }
      for (std::size_t k = 0; k < count; ++k) {
        result.velocity[k] =
            config.momentum * result.velocity[k] - config.learning_rate * grads.flat[k];
        params.flat[k] += result.velocity[k];
      }
    }
    result.loss_history.push_back(loss_sum / static_cast<double>(order.size()));

    if (val_metric) {
      const double metric = val_metric(params);
      if (metric > best_metric) {
        best_metric = metric;
        best = params;
        best_epoch = epoch;
      }
    }
  }

  if (val_metric && best_epoch > 0) {
    result.params = std::move(best);
    result.best_epoch = best_epoch;
    result.best_metric = best_metric;
  }
  return result;
}

Prediction predict_sequence(const Params& params, const Matrix& sequence) {
  const Matrix probs = infer(params, sequence);
  Prediction pred;
  pred.votes.resize(probs.rows);
  pred.scores.resize(probs.rows);
  for (std::size_t t = 0; t < probs.rows; ++t) {
    pred.scores[t] = probs(t, 1) - 0.5;
    pred.votes[t] = pred.scores[t] >= 0.0 ? 1 : 0;
  }
  return pred;
}

void save_model(const std::string& path, const ModelFile& file) {
  nlohmann::json header;
  header["config"] = {{"input_dim", file.config.input_dim},
                      {"hidden_units", file.config.hidden_units},
                      {"learning_rate", file.config.learning_rate},
                      {"momentum", file.config.momentum},
                      {"weight_noise_std", file.config.weight_noise_std},
                      {"noise_on_bias", file.config.noise_on_bias},
                      {"grad_clip", file.config.grad_clip},
                      {"epochs", file.config.epochs},
                      {"seed", file.config.seed}};
  header["au"] = file.au;
  header["network"] = file.network;
  header["best_epoch"] = file.best_epoch;
  header["loss_history"] = file.loss_history;
  header["standardizer"] = {{"mean", file.standardizer.mean},
                            {"std", file.standardizer.stddev}};
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file: " + path);
  out.write("AULM", 4);
  write_u32_le(out, kModelFormatVersion);
  write_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  std::vector<unsigned char> buf(file.params.flat.size() * 8);
  for (std::size_t k = 0; k < file.params.flat.size(); ++k) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(file.params.flat[k]);
    for (int byte = 0; byte < 8; ++byte) {
      buf[k * 8 + byte] = static_cast<unsigned char>(bits >> (8 * byte));
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing model file: " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "AULM", 4) != 0) {
    throw FormatError("bad magic in model file: " + path);
  }
  const std::uint32_t version = read_u32_le(in, path);
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version: " + path);
  }
  const std::uint32_t header_len = read_u32_le(in, path);
  std::string header_text(header_len, '\0');
  if (!in.read(header_text.data(), header_len)) {
    throw FormatError("truncated model header: " + path);
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad model header JSON: " + path + ": " + e.what());
  }

  ModelFile file;
  try {
    const nlohmann::json& c = header.at("config");
    file.config.input_dim = c.at("input_dim").get<std::size_t>();
    file.config.hidden_units = c.at("hidden_units").get<std::size_t>();
    file.config.learning_rate = c.at("learning_rate").get<double>();
    file.config.momentum = c.at("momentum").get<double>();
    file.config.weight_noise_std = c.at("weight_noise_std").get<double>();
    file.config.noise_on_bias = c.at("noise_on_bias").get<bool>();
    file.config.grad_clip = c.at("grad_clip").get<double>();
    file.config.epochs = c.at("epochs").get<int>();
    file.config.seed = c.at("seed").get<std::uint64_t>();
    file.au = header.at("au").get<int>();
    file.network = header.value("network", std::string{});
    file.best_epoch = header.at("best_epoch").get<int>();
    file.loss_history = header.at("loss_history").get<std::vector<double>>();
    file.standardizer.mean = header.at("standardizer").at("mean").get<std::vector<double>>();
    file.standardizer.stddev = header.at("standardizer").at("std").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model header missing fields: " + path + ": " + e.what());
  }

  file.params = Params(file.config.input_dim, file.config.hidden_units);
  std::vector<unsigned char> buf(file.params.flat.size() * 8);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw FormatError("truncated parameter block: " + path);
  }
  for (std::size_t k = 0; k < file.params.flat.size(); ++k) {
    std::uint64_t bits = 0;
    for (int byte = 0; byte < 8; ++byte) {
      bits |= std::uint64_t(buf[k * 8 + byte]) << (8 * byte);
    }
    file.params.flat[k] = std::bit_cast<double>(bits);
  }
  if (in.get() != std::ifstream::traits_type::eof()) {
    throw FormatError("trailing bytes after parameter block: " + path);
  }
  return file;
}

}  // namespace aupipe::lstm
