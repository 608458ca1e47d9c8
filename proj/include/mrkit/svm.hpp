// Binary soft-margin SVM trained by SMO.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace mrkit {

enum class SvmKernel { Linear, Precomputed };

std::string_view to_string(SvmKernel k);

struct SvmParams {
  double C = 1.0;
  double tolerance = 1e-3;
  int max_passes = 100;
  SvmKernel kernel = SvmKernel::Linear;
  std::uint64_t seed = 42;
};

struct SvmModel {
  SvmKernel kernel = SvmKernel::Linear;
  std::size_t training_size = 0;
  std::size_t dimension = 0;  // row length (linear) or training_size (precomputed)
  std::vector<std::size_t> support_indices;
  std::vector<double> coefficients;  // alpha_i * y_i, aligned with support_indices
  std::vector<std::vector<double>> support_rows;  // linear kernel only
  double bias = 0.0;
  double C = 1.0;
  std::string params_hash;
  int iterations = 0;
  bool converged = false;
};

/// data: design-matrix rows (linear) or an n x n Gram matrix (precomputed).
/// labels in {+1, -1}. Throws std::invalid_argument on single-class input,
/// dimension mismatch or bad parameters.
SvmModel train_svm(const std::vector<std::vector<double>> &data, const std::vector<int> &labels,
                   const SvmParams &p);

/// f(x) = sum alpha_i y_i k(x_i, x) + b. For a precomputed model the sample is
/// the kernel column k(x_j, x) over all training samples j.
double decision_value(const SvmModel &m, const std::vector<double> &sample);

/// sign(f) with sign(0) = +1.
int predict(const SvmModel &m, const std::vector<double> &sample);

/// Full dual vector reconstructed from the sparse model.
std::vector<double> dual_alphas(const SvmModel &m);

/// Largest KKT residual over the training set (0 when every condition holds
/// exactly).
double kkt_violation(const SvmModel &m, const std::vector<std::vector<double>> &data,
                     const std::vector<int> &labels);

std::string svm_params_hash(const SvmParams &p);

nlohmann::json to_json(const SvmModel &m);
SvmModel svm_model_from_json(const nlohmann::json &j);

} // namespace mrkit
