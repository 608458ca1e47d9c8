#include "mrkit/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "mrkit/seed.hpp"

namespace mrkit {

std::string_view to_string(SvmKernel k) { return k == SvmKernel::Linear ? "linear" : "precomputed"; }

namespace {

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

void check_inputs(const std::vector<std::vector<double>> &data, const std::vector<int> &labels,
                  const SvmParams &p) {
  if (!(p.C > 0.0))
    throw std::invalid_argument("SVM: C must be positive");
  if (!(p.tolerance > 0.0))
    throw std::invalid_argument("SVM: tolerance must be positive");
  if (p.max_passes < 1)
    throw std::invalid_argument("SVM: max passes must be >= 1");
  if (data.size() != labels.size())
    throw std::invalid_argument("SVM: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(data.size()) + " samples");
  if (data.empty())
    throw std::invalid_argument("SVM: empty training set");
  const std::size_t width = p.kernel == SvmKernel::Precomputed ? data.size() : data.front().size();
  for (const auto &row : data)
    if (row.size() != width)
      throw std::invalid_argument(p.kernel == SvmKernel::Precomputed ? "SVM: Gram matrix is not square"
                                                                      : "SVM: ragged design matrix");
  bool pos = false, neg = false;
  for (int y : labels) {
    if (y == 1)
      pos = true;
    else if (y == -1)
      neg = true;
    else
      throw std::invalid_argument("SVM: labels must be +1 or -1");
  }
  if (!pos || !neg)
    throw std::invalid_argument("SVM: training data contains a single class");
}

std::vector<std::vector<double>> kernel_matrix(const std::vector<std::vector<double>> &data, SvmKernel k) {
  if (k == SvmKernel::Precomputed)
    return data;
  const std::size_t n = data.size();
  std::vector<std::vector<double>> K(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      K[i][j] = K[j][i] = dot(data[i], data[j]);
  return K;
}

} // namespace

std::string svm_params_hash(const SvmParams &p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "svm;C=%.17g;tol=%.17g;passes=%d;kernel=%s;seed=%llu", p.C, p.tolerance,
                p.max_passes, std::string(to_string(p.kernel)).c_str(), static_cast<unsigned long long>(p.seed));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(buf)));
  return hex;
}

SvmModel train_svm(const std::vector<std::vector<double>> &data, const std::vector<int> &labels,
                   const SvmParams &p) {
  check_inputs(data, labels, p);
  const std::size_t n = data.size();
  const double C = p.C;
  auto K = kernel_matrix(data, p.kernel);
  std::vector<double> y(labels.begin(), labels.end());
  std::vector<double> alpha(n, 0.0);
  // Gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij.
  std::vector<double> G(n, -1.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(p.seed, "smo-scan-order"));
  rng.shuffle(order);

  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  const long max_iter = static_cast<long>(p.max_passes) * static_cast<long>(std::max<std::size_t>(n, 100)) * 10;
  SvmModel m;
  double up = 0.0, low = 0.0;
  long iter = 0;
  for (;; ++iter) {
    // Maximal violating pair; first in seeded scan order wins ties.
    std::size_t i = n, j = n;
    up = -INFINITY;
    low = INFINITY;
    for (auto t : order) {
      double v = -y[t] * G[t];
      if (in_up(t) && v > up) {
        up = v;
        i = t;
      }
      if (in_low(t) && v < low) {
        low = v;
        j = t;
      }
    }
    if (i == n || j == n || up - low <= p.tolerance) {
      m.converged = true;
      break;
    }
    if (iter >= max_iter)
      break;

    double a = K[i][i] + K[j][j] - 2.0 * K[i][j];
    if (a <= 0.0)
      a = 1e-12;
    double t = (up - low) / a;
    double cap_i = y[i] > 0 ? C - alpha[i] : alpha[i];
    double cap_j = y[j] > 0 ? alpha[j] : C - alpha[j];
    t = std::min({t, cap_i, cap_j});
    bool clip_i = cap_i <= t, clip_j = cap_j <= t;

    alpha[i] += y[i] * t;
    alpha[j] -= y[j] * t;
    if (clip_i)
      alpha[i] = y[i] > 0 ? C : 0.0;
    if (clip_j)
      alpha[j] = y[j] > 0 ? 0.0 : C;
    for (std::size_t k = 0; k < n; ++k)
      G[k] += y[k] * t * (K[k][i] - K[k][j]);
  }
  m.iterations = static_cast<int>(iter);

  double free_sum = 0.0;
  int free_count = 0;
  for (std::size_t t = 0; t < n; ++t)
    if (alpha[t] > 0.0 && alpha[t] < C) {
      free_sum += -y[t] * G[t];
      ++free_count;
    }
  if (free_count > 0)
    m.bias = free_sum / free_count;
  else if (std::isfinite(up) && std::isfinite(low))
    m.bias = (up + low) / 2.0;
  else
    m.bias = std::isfinite(up) ? up : low;

  m.kernel = p.kernel;
  m.training_size = n;
  m.dimension = p.kernel == SvmKernel::Precomputed ? n : data.front().size();
  m.C = C;
  m.params_hash = svm_params_hash(p);
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0)
      continue;
    m.support_indices.push_back(t);
    m.coefficients.push_back(alpha[t] * y[t]);
    if (p.kernel == SvmKernel::Linear)
      m.support_rows.push_back(data[t]);
  }
  return m;
}

double decision_value(const SvmModel &m, const std::vector<double> &sample) {
  if (sample.size() != m.dimension)
    throw std::invalid_argument("SVM: sample has " + std::to_string(sample.size()) + " entries, model expects " +
                                std::to_string(m.dimension));
  double f = m.bias;
  for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
    double k = m.kernel == SvmKernel::Linear ? dot(m.support_rows[s], sample) : sample[m.support_indices[s]];
    f += m.coefficients[s] * k;
  }
  return f;
}

int predict(const SvmModel &m, const std::vector<double> &sample) {
  return decision_value(m, sample) >= 0.0 ? 1 : -1;
}

std::vector<double> dual_alphas(const SvmModel &m) {
  std::vector<double> a(m.training_size, 0.0);
  for (std::size_t s = 0; s < m.support_indices.size(); ++s)
    a[m.support_indices[s]] = std::abs(m.coefficients[s]);
  return a;
}

double kkt_violation(const SvmModel &m, const std::vector<std::vector<double>> &data,
                     const std::vector<int> &labels) {
  if (data.size() != m.training_size || labels.size() != m.training_size)
    throw std::invalid_argument("KKT audit: data does not match the model's training set");
  auto alpha = dual_alphas(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    // A Gram row is the kernel column of its own sample.
    double margin = labels[i] * decision_value(m, data[i]) - 1.0;
    double v;
    if (alpha[i] <= 0.0)
      v = std::max(0.0, -margin);
    else if (alpha[i] >= m.C)
      v = std::max(0.0, margin);
    else
      v = std::abs(margin);
    worst = std::max(worst, v);
  }
  return worst;
}

nlohmann::json to_json(const SvmModel &m) {
  nlohmann::json j;
  j["kernel"] = std::string(to_string(m.kernel));
  j["params_hash"] = m.params_hash;
  j["C"] = m.C;
  j["training_size"] = m.training_size;
  j["dimension"] = m.dimension;
  j["bias"] = m.bias;
  j["iterations"] = m.iterations;
  j["converged"] = m.converged;
  j["support_indices"] = m.support_indices;
  j["coefficients"] = m.coefficients;
  if (m.kernel == SvmKernel::Linear)
    j["support_rows"] = m.support_rows;
  return j;
}

SvmModel svm_model_from_json(const nlohmann::json &j) {
  SvmModel m;
  auto kernel = j.at("kernel").get<std::string>();
  if (kernel == "linear")
    m.kernel = SvmKernel::Linear;
  else if (kernel == "precomputed")
    m.kernel = SvmKernel::Precomputed;
  else
    throw std::invalid_argument("unknown SVM kernel '" + kernel + "'");
  m.params_hash = j.at("params_hash").get<std::string>();
  m.C = j.at("C").get<double>();
  m.training_size = j.at("training_size").get<std::size_t>();
  m.dimension = j.at("dimension").get<std::size_t>();
  m.bias = j.at("bias").get<double>();
  m.iterations = j.value("iterations", 0);
  m.converged = j.value("converged", false);
  m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  if (m.coefficients.size() != m.support_indices.size())
    throw std::invalid_argument("SVM model: coefficient/support count mismatch");
  if (m.kernel == SvmKernel::Linear) {
    m.support_rows = j.at("support_rows").get<std::vector<std::vector<double>>>();
    if (m.support_rows.size() != m.support_indices.size())
      throw std::invalid_argument("SVM model: support row count mismatch");
  }
  return m;
}

} // namespace mrkit
