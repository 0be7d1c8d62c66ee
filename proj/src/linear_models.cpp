#include "aupipe/linear_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "aupipe/kernels.hpp"

namespace aupipe {

namespace {

void check_binary_labels(std::size_t rows, std::span<const std::uint8_t> y, const char* op) {
  if (rows != y.size()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(rows) + " rows vs " +
                     std::to_string(y.size()) + " labels");
  }
  std::size_t pos = 0;
  for (std::uint8_t v : y) pos += v ? 1 : 0;
  if (pos == 0 || pos == y.size()) {
    throw InsufficientDataError(std::string(op) + ": both classes must be present");
  }
}

void check_finite(const Matrix& x, const char* op) {
  for (double v : x.data) {
    if (!std::isfinite(v)) throw DomainError(std::string(op) + ": non-finite feature value");
  }
}

}  // namespace

LdaModel train_lda(const Matrix& x, std::span<const std::uint8_t> y, double ridge) {
  check_binary_labels(x.rows, y, "train_lda");
  if (x.rows < 2) throw InsufficientDataError("train_lda: need at least 2 rows");
  check_finite(x, "train_lda");
  if (ridge < 0.0) throw DomainError("train_lda: negative ridge");

  const std::size_t n = x.rows;
  const std::size_t d = x.cols;

  std::vector<double> mean_pos(d, 0.0), mean_neg(d, 0.0);
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double>& mean = y[r] ? mean_pos : mean_neg;
    (y[r] ? n_pos : n_neg) += 1;
    const double* row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    mean_pos[j] /= static_cast<double>(n_pos);
    mean_neg[j] /= static_cast<double>(n_neg);
  }

  // Pooled within-class scatter over N, via the gram of the class-centered rows.
  Matrix centered(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const std::vector<double>& mean = y[r] ? mean_pos : mean_neg;
    const double* src = x.row(r);
    double* dst = centered.row(r);
    for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] - mean[j];
  }
  std::vector<double> scatter(d * d);
  kernels::gram(centered.data.data(), n, d, scatter.data());
  for (double& v : scatter) v /= static_cast<double>(n);

  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) trace += scatter[j * d + j];
  double lambda = ridge * trace / static_cast<double>(d);
  if (ridge > 0.0 && lambda <= 0.0) lambda = ridge;  // all-constant features
  for (std::size_t j = 0; j < d; ++j) scatter[j * d + j] += lambda;

  LdaModel model;
  model.ridge = ridge;
  model.weights.resize(d);
  for (std::size_t j = 0; j < d; ++j) model.weights[j] = mean_pos[j] - mean_neg[j];
  if (!kernels::cholesky(scatter.data(), d)) {
    throw NumericError("train_lda: covariance is singular; increase ridge");
  }
  kernels::cholesky_solve(scatter.data(), d, model.weights.data());

  double midpoint_projection = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    midpoint_projection += model.weights[j] * 0.5 * (mean_pos[j] + mean_neg[j]);
  }
  model.bias = -midpoint_projection;
  return model;
}

SvmModel train_svm(const Matrix& x, std::span<const std::uint8_t> y,
                   const LinearTrainConfig& config, SvmTrainStats* stats) {
  check_binary_labels(x.rows, y, "train_svm");
  check_finite(x, "train_svm");
  if (config.cost <= 0.0 || config.tolerance <= 0.0 || config.max_epochs <= 0) {
    throw ValidationError("train_svm: cost, tolerance and max_epochs must be positive");
  }

  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  const double c = config.cost;

  std::vector<double> sign(n);
  for (std::size_t i = 0; i < n; ++i) sign[i] = y[i] ? 1.0 : -1.0;

  // Squared norms of the augmented rows [x_i; 1]; at least 1, so the
  // coordinate step below never divides by zero.
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) qd[i] = kernels::dot(x.row(i), x.row(i), d) + 1.0;

  std::vector<double> alpha(n, 0.0);
  std::vector<double> w(d, 0.0);
  double b = 0.0;

  SvmModel model;
  model.cost = c;
  model.converged = false;

  const auto projected_gradient = [&](std::size_t i, double grad) {
    if (alpha[i] <= 0.0) return std::min(grad, 0.0);
    if (alpha[i] >= c) return std::max(grad, 0.0);
    return grad;
  };
  // Largest |PG| at the current iterate, without updating anything.
  const auto measure_violation = [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double grad = sign[i] * (kernels::dot(w.data(), x.row(i), d) + b) - 1.0;
      worst = std::max(worst, std::fabs(projected_gradient(i, grad)));
    }
    return worst;
  };

  int epochs_run = 0;
  double final_violation = 0.0;
  while (epochs_run < config.max_epochs) {
    double max_violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = x.row(i);
      const double grad = sign[i] * (kernels::dot(w.data(), xi, d) + b) - 1.0;
      const double projected = projected_gradient(i, grad);
      max_violation = std::max(max_violation, std::fabs(projected));
      if (std::fabs(projected) > 1e-12) {
        const double updated = std::min(std::max(alpha[i] - grad / qd[i], 0.0), c);
        const double step = (updated - alpha[i]) * sign[i];
        alpha[i] = updated;
        for (std::size_t j = 0; j < d; ++j) w[j] += step * xi[j];
        b += step;
      }
    }
    ++epochs_run;
    if (stats) {
      // Dual objective in minimization form: 0.5 |w~|^2 - sum alpha.
      double alpha_sum = 0.0;
      for (double a : alpha) alpha_sum += a;
      stats->dual_objective.push_back(
          0.5 * (kernels::dot(w.data(), w.data(), d) + b * b) - alpha_sum);
    }
    if (max_violation <= config.tolerance) {
      // Confirm at the post-update iterate so the reported violation is the
      // one that actually holds at termination.
      final_violation = measure_violation();
      if (final_violation <= config.tolerance) {
        model.converged = true;
        break;
      }
    }
  }
  if (!model.converged) final_violation = measure_violation();

  model.weights = std::move(w);
  model.bias = b;
  if (stats) {
    stats->alpha = std::move(alpha);
    stats->epochs = epochs_run;
    stats->max_violation = final_violation;
  }
  return model;
}

double decision_value(std::span<const double> weights, double bias, std::span<const double> x) {
  if (weights.size() != x.size()) {
    throw ShapeError("decision_value: weight dimension " + std::to_string(weights.size()) +
                     " vs input dimension " + std::to_string(x.size()));
  }
  return kernels::dot(weights.data(), x.data(), x.size()) + bias;
}

double decision_value(const LdaModel& model, std::span<const double> x) {
  return decision_value(std::span<const double>(model.weights), model.bias, x);
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  return decision_value(std::span<const double>(model.weights), model.bias, x);
}

double svm_primal_objective(const Matrix& x, std::span<const std::uint8_t> y,
                            std::span<const double> weights, double bias, double cost) {
  double objective =
      0.5 * (kernels::dot(weights.data(), weights.data(), weights.size()) + bias * bias);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double sign = y[i] ? 1.0 : -1.0;
    const double margin = 1.0 - sign * (kernels::dot(weights.data(), x.row(i), x.cols) + bias);
    objective += cost * std::max(0.0, margin);
  }
  return objective;
}

void save_linear_model(const std::string& path, const LinearModelFile& file) {
  nlohmann::json j;
  j["kind"] = file.kind;
  j["au"] = file.au;
  j["network"] = file.network;
  j["dimension"] = file.dimension;
  j["weights"] = file.weights;
  j["bias"] = file.bias;
  j["config"] = {{"cost", file.config.cost},
                 {"tolerance", file.config.tolerance},
                 {"max_epochs", file.config.max_epochs},
                 {"ridge", file.config.ridge}};
  j["convergence_flag"] = file.convergence_flag;
  j["standardizer"] = {{"mean", file.standardizer.mean}, {"std", file.standardizer.stddev}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write model file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing model file: " + path);
}

LinearModelFile load_linear_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad model JSON: " + path + ": " + e.what());
  }
  LinearModelFile file;
  try {
    file.kind = j.at("kind").get<std::string>();
    file.au = j.at("au").get<int>();
    file.network = j.value("network", std::string{});
    file.dimension = j.at("dimension").get<std::size_t>();
    file.weights = j.at("weights").get<std::vector<double>>();
    file.bias = j.at("bias").get<double>();
    file.config.cost = j.at("config").at("cost").get<double>();
    file.config.tolerance = j.at("config").at("tolerance").get<double>();
    file.config.max_epochs = j.at("config").at("max_epochs").get<int>();
    file.config.ridge = j.at("config").at("ridge").get<double>();
    file.convergence_flag = j.at("convergence_flag").get<bool>();
    file.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    file.standardizer.stddev = j.at("standardizer").at("std").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model JSON missing fields: " + path + ": " + e.what());
  }
  if (file.kind != "lda" && file.kind != "svm") {
    throw FormatError("unknown model kind '" + file.kind + "': " + path);
  }
  if (file.weights.size() != file.dimension) {
    throw FormatError("weight count does not match dimension: " + path);
  }
  AuId::from_number(file.au);
  return file;
}

}  // namespace aupipe
