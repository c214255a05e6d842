// SPDX-License-Identifier: Apache-2.0
#include "bytelm/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "bytelm/errors.hpp"
#include "bytelm/rng.hpp"

namespace bytelm {

namespace fs = std::filesystem;

namespace {

void require_rows(const FeatureMatrix& X, std::span<const int> y) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw ContractError("feature rows and label count differ");
  }
  if (X.rows() < 2) throw ConfigError("need at least two examples");
}

std::vector<std::size_t> class_counts(std::span<const int> y, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int label : y) {
    if (label < 0 || label >= n_classes) {
      throw ContractError("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(n_classes) + ")");
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  return counts;
}

int infer_classes(std::span<const int> y) {
  int k = 0;
  for (int label : y) {
    if (label < 0) throw ContractError("negative label");
    k = std::max(k, label + 1);
  }
  return k;
}

void require_all_classes(std::span<const int> y, int n_classes) {
  const auto counts = class_counts(y, n_classes);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw DegenerateLabelsError("class " + std::to_string(c) + " has no examples");
    }
  }
}

double positive_rate(std::span<const int> y) {
  std::size_t pos = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw ContractError("binary probe needs 0/1 labels");
    pos += static_cast<std::size_t>(label);
  }
  if (pos == 0 || pos == y.size()) {
    throw DegenerateLabelsError("binary probe needs both classes present");
  }
  return static_cast<double>(pos) / static_cast<double>(y.size());
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Smooth part of the objective: mean negative log-likelihood and its gradient.
class SmoothLoss {
 public:
  SmoothLoss(const FeatureMatrix& X, std::span<const int> y, bool binary)
      : X_(X), y_(y), binary_(binary) {}

  double value(const Eigen::MatrixXd& W, const Eigen::VectorXd& b) const {
    const double n = static_cast<double>(X_.rows());
    if (binary_) {
      const Eigen::VectorXd z = (X_ * W.row(0).transpose()).array() + b[0];
      double total = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        total += softplus(z[i]) - y_[static_cast<std::size_t>(i)] * z[i];
      }
      return total / n;
    }
    Eigen::MatrixXd Z = X_ * W.transpose();
    Z.rowwise() += b.transpose();
    double total = 0.0;
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
      const double mx = Z.row(i).maxCoeff();
      const double lse = mx + std::log((Z.row(i).array() - mx).exp().sum());
      total += lse - Z(i, y_[static_cast<std::size_t>(i)]);
    }
    return total / n;
  }

  double value_and_gradient(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                            Eigen::MatrixXd& gW, Eigen::VectorXd& gb) const {
    const double n = static_cast<double>(X_.rows());
    if (binary_) {
      const Eigen::VectorXd z = (X_ * W.row(0).transpose()).array() + b[0];
      Eigen::VectorXd r(z.size());
      double total = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double yi = y_[static_cast<std::size_t>(i)];
        total += softplus(z[i]) - yi * z[i];
        r[i] = sigmoid(z[i]) - yi;
      }
      gW = (X_.transpose() * r).transpose() / n;
      gb = Eigen::VectorXd::Constant(1, r.sum() / n);
      return total / n;
    }
    Eigen::MatrixXd Z = X_ * W.transpose();
    Z.rowwise() += b.transpose();
    double total = 0.0;
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
      const double mx = Z.row(i).maxCoeff();
      Z.row(i) = (Z.row(i).array() - mx).exp().matrix();
      const double s = Z.row(i).sum();
      const int yi = y_[static_cast<std::size_t>(i)];
      total += std::log(s) - std::log(Z(i, yi));
      Z.row(i) /= s;
      Z(i, yi) -= 1.0;
    }
    gW = Z.transpose() * X_ / n;
    gb = Z.colwise().sum().transpose() / n;
    return total / n;
  }

 private:
  const FeatureMatrix& X_;
  std::span<const int> y_;
  bool binary_;
};

double l1_norm(const Eigen::MatrixXd& W) { return W.cwiseAbs().sum(); }

std::size_t count_nonzero(const Eigen::MatrixXd& W) {
  return static_cast<std::size_t>((W.array() != 0.0).count());
}

ProbeModel run_ista(const SmoothLoss& loss, ProbeModel model, double lambda,
                    const SolverOptions& options) {
  if (lambda < 0.0 || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
  Eigen::MatrixXd gW;
  Eigen::VectorXd gb;
  double f = loss.value_and_gradient(model.weights, model.bias, gW, gb);
  double F = f + lambda * l1_norm(model.weights);
  double step = 1.0;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    Eigen::MatrixXd W_new;
    Eigen::VectorXd b_new;
    double f_new = 0.0;
    for (;;) {
      W_new = (model.weights - step * gW)
                  .unaryExpr([&](double v) { return soft_threshold(v, step * lambda); });
      b_new = model.bias - step * gb;
      f_new = loss.value(W_new, b_new);
      const Eigen::MatrixXd dW = W_new - model.weights;
      const Eigen::VectorXd db = b_new - model.bias;
      const double bound = f + (gW.cwiseProduct(dW)).sum() + gb.dot(db) +
                           (dW.squaredNorm() + db.squaredNorm()) / (2.0 * step);
      if (f_new <= bound + 1e-15 * std::abs(f)) break;
      step *= 0.5;
      if (step < 1e-20) break;
    }
    if (step < 1e-20) break;
    model.weights = std::move(W_new);
    model.bias = std::move(b_new);
    f = loss.value_and_gradient(model.weights, model.bias, gW, gb);
    const double F_new = f + lambda * l1_norm(model.weights);
    const double change = std::abs(F - F_new) / std::max(std::abs(F), 1e-300);
    F = F_new;
    step *= 2.0;
    if (change < options.tolerance) {
      ++it;
      break;
    }
  }
  model.lambda = lambda;
  model.iterations = it;
  model.objective = F;
  model.nnz = count_nonzero(model.weights);
  return model;
}

bool warm_compatible(const ProbeModel* warm, Eigen::Index rows, Eigen::Index cols) {
  return warm != nullptr && warm->weights.rows() == rows && warm->weights.cols() == cols &&
         warm->bias.size() == rows;
}

}  // namespace

double lambda_max(const FeatureMatrix& X, std::span<const int> y) {
  require_rows(X, y);
  const double p = positive_rate(y);
  Eigen::VectorXd r(X.rows());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = y[static_cast<std::size_t>(i)] - p;
  return (X.transpose() * r).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
}

double lambda_max_multinomial(const FeatureMatrix& X, std::span<const int> y) {
  require_rows(X, y);
  const int k = infer_classes(y);
  if (k < 2) throw DegenerateLabelsError("need at least two classes");
  require_all_classes(y, k);
  const auto counts = class_counts(y, k);
  Eigen::MatrixXd R(X.rows(), k);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (int c = 0; c < k; ++c) {
      const double prior = static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                           static_cast<double>(X.rows());
      R(i, c) = (y[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0) - prior;
    }
  }
  return (X.transpose() * R).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
}

ProbeModel fit_logreg_l1(const FeatureMatrix& X, std::span<const int> y, double lambda,
                         const SolverOptions& options, const ProbeModel* warm_start) {
  require_rows(X, y);
  const double p = positive_rate(y);
  ProbeModel model;
  model.n_classes = 2;
  if (warm_compatible(warm_start, 1, X.cols())) {
    model.weights = warm_start->weights;
    model.bias = warm_start->bias;
  } else {
    model.weights = Eigen::MatrixXd::Zero(1, X.cols());
    model.bias = Eigen::VectorXd::Constant(1, std::log(p / (1.0 - p)));
  }
  SmoothLoss loss(X, y, true);
  return run_ista(loss, std::move(model), lambda, options);
}

ProbeModel fit_multinomial_l1(const FeatureMatrix& X, std::span<const int> y, double lambda,
                              const SolverOptions& options, const ProbeModel* warm_start) {
  require_rows(X, y);
  const int k = infer_classes(y);
  if (k < 2) throw DegenerateLabelsError("need at least two classes");
  require_all_classes(y, k);
  const auto counts = class_counts(y, k);
  ProbeModel model;
  model.n_classes = k;
  if (warm_compatible(warm_start, k, X.cols())) {
    model.weights = warm_start->weights;
    model.bias = warm_start->bias;
  } else {
    model.weights = Eigen::MatrixXd::Zero(k, X.cols());
    model.bias.resize(k);
    for (int c = 0; c < k; ++c) {
      model.bias[c] = std::log(static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                               static_cast<double>(X.rows()));
    }
  }
  SmoothLoss loss(X, y, false);
  return run_ista(loss, std::move(model), lambda, options);
}

ProbeModel fit_l1(const FeatureMatrix& X, std::span<const int> y, double lambda,
                  const SolverOptions& options, const ProbeModel* warm_start) {
  if (infer_classes(y) <= 2) return fit_logreg_l1(X, y, lambda, options, warm_start);
  return fit_multinomial_l1(X, y, lambda, options, warm_start);
}

double probe_objective(const ProbeModel& model, const FeatureMatrix& X, std::span<const int> y) {
  require_rows(X, y);
  const SmoothLoss loss(X, y, model.binary());
  return loss.value(model.weights, model.bias) + model.lambda * l1_norm(model.weights);
}

Eigen::MatrixXd predict_proba(const ProbeModel& model, const FeatureMatrix& X) {
  if (X.cols() != model.width()) {
    throw ContractError("feature width " + std::to_string(X.cols()) +
                        " does not match probe width " + std::to_string(model.width()));
  }
  if (model.binary()) {
    Eigen::MatrixXd P(X.rows(), 2);
    const Eigen::VectorXd z = (X * model.weights.row(0).transpose()).array() + model.bias[0];
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      P(i, 1) = sigmoid(z[i]);
      P(i, 0) = 1.0 - P(i, 1);
    }
    return P;
  }
  Eigen::MatrixXd Z = X * model.weights.transpose();
  Z.rowwise() += model.bias.transpose();
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    Z.row(i) = (Z.row(i).array() - Z.row(i).maxCoeff()).exp().matrix();
    Z.row(i) /= Z.row(i).sum();
  }
  return Z;
}

std::vector<int> predict(const ProbeModel& model, const FeatureMatrix& X) {
  const Eigen::MatrixXd P = predict_proba(model, X);
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    if (model.binary()) {
      out[static_cast<std::size_t>(i)] = P(i, 1) >= 0.5 ? 1 : 0;
    } else {
      Eigen::Index best = 0;
      P.row(i).maxCoeff(&best);  // first maximum wins
      out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
  }
  return out;
}

double accuracy(const ProbeModel& model, const FeatureMatrix& X, std::span<const int> y) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw ContractError("feature rows and label count differ");
  }
  if (y.empty()) return 0.0;
  const auto pred = predict(model, X);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += pred[i] == y[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

PathResult fit_path(const FeatureMatrix& X_train, std::span<const int> y_train,
                    const FeatureMatrix& X_val, std::span<const int> y_val,
                    std::size_t n_lambdas, const SolverOptions& options) {
  if (n_lambdas == 0) throw ConfigError("regularization grid is empty");
  const bool binary = infer_classes(y_train) <= 2;
  const double top = binary ? lambda_max(X_train, y_train)
                            : lambda_max_multinomial(X_train, y_train);
  PathResult result;
  std::optional<ProbeModel> prev;
  double best_acc = -1.0;
  for (std::size_t i = 0; i < n_lambdas; ++i) {
    const double frac = n_lambdas == 1 ? 0.0
                                       : static_cast<double>(i) / static_cast<double>(n_lambdas - 1);
    const double lambda = top * std::pow(10.0, -4.0 * frac);
    ProbeModel model = fit_l1(X_train, y_train, lambda, options, prev ? &*prev : nullptr);
    PathPoint point;
    point.lambda = lambda;
    point.nnz = model.nnz;
    point.objective = model.objective;
    point.train_accuracy = accuracy(model, X_train, y_train);
    point.val_accuracy = accuracy(model, X_val, y_val);
    result.path.push_back(point);
    if (point.val_accuracy > best_acc) {
      best_acc = point.val_accuracy;
      result.best = model;
      result.best_index = i;
    }
    prev = std::move(model);
  }
  return result;
}

std::vector<std::size_t> stratified_sample(std::span<const int> y, std::size_t n,
                                           std::uint64_t seed) {
  if (n > y.size()) {
    throw ConfigError("sample of " + std::to_string(n) + " exceeds " +
                      std::to_string(y.size()) + " available examples");
  }
  const int k = infer_classes(y);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);

  const double total = static_cast<double>(y.size());
  std::vector<std::size_t> take(static_cast<std::size_t>(k));
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < take.size(); ++c) {
    const double exact = static_cast<double>(n) * static_cast<double>(by_class[c].size()) / total;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += take[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n; ++r) {
    ++take[remainders[r % remainders.size()].second];
    ++assigned;
  }

  Rng rng(seed);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < take.size(); ++c) {
    auto pool = by_class[c];
    rng.shuffle(std::span(pool));
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

FeatureMatrix take_rows(const FeatureMatrix& X, std::span<const std::size_t> idx) {
  FeatureMatrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

std::vector<int> take_labels(std::span<const int> y, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(y[i]);
  return out;
}

}  // namespace

ProbeModel fit_selected(const FeatureMatrix& X, std::span<const int> y, std::uint64_t seed,
                        const EfficiencyOptions& options) {
  const std::size_t n = y.size();
  const bool binary = infer_classes(y) <= 2;
  if (n < options.min_validated) {
    const double top = binary ? lambda_max(X, y) : lambda_max_multinomial(X, y);
    return fit_l1(X, y, options.small_sample_lambda_ratio * top, options.solver);
  }
  const auto n_val = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * options.validation_fraction));
  std::vector<std::size_t> val_idx = stratified_sample(y, n_val, seed);
  std::vector<bool> in_val(n, false);
  for (std::size_t i : val_idx) in_val[i] = true;
  std::vector<std::size_t> fit_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_val[i]) fit_idx.push_back(i);
  }
  const auto path = fit_path(take_rows(X, fit_idx), take_labels(y, fit_idx),
                             take_rows(X, val_idx), take_labels(y, val_idx),
                             options.n_lambdas, options.solver);
  return fit_l1(X, y, path.best.lambda, options.solver, &path.best);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ContractError("spearman needs two equal-length series of at least 2 values");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const Eigen::Map<const Eigen::VectorXd> x(ra.data(), static_cast<Eigen::Index>(ra.size()));
  const Eigen::Map<const Eigen::VectorXd> z(rb.data(), static_cast<Eigen::Index>(rb.size()));
  const Eigen::VectorXd dx = x.array() - x.mean();
  const Eigen::VectorXd dz = z.array() - z.mean();
  const double denom = std::sqrt(dx.squaredNorm() * dz.squaredNorm());
  return denom > 0.0 ? dx.dot(dz) / denom : 0.0;
}

EfficiencyCurve data_efficiency_curve(const FeatureMatrix& X_train, std::span<const int> y_train,
                                      const FeatureMatrix& X_test, std::span<const int> y_test,
                                      std::span<const std::size_t> sizes, std::size_t runs,
                                      std::uint64_t seed, const EfficiencyOptions& options) {
  if (runs == 0) throw ConfigError("need at least one run per size");
  require_rows(X_train, y_train);
  const auto n_classes = static_cast<std::size_t>(infer_classes(y_train));
  EfficiencyCurve curve;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::size_t size = sizes[si];
    if (size < n_classes) {
      std::cerr << "warning: skipping sample size " << size << " (fewer than " << n_classes
                << " classes)\n";
      curve.skipped.push_back(size);
      continue;
    }
    if (size > y_train.size()) {
      throw ConfigError("sample size " + std::to_string(size) + " exceeds training set of " +
                        std::to_string(y_train.size()));
    }
    EfficiencyPoint point;
    point.size = size;
    point.runs = runs;
    point.accuracies.assign(runs, 0.0);
    std::vector<std::exception_ptr> errors(runs);
    auto work = [&](std::size_t r) {
      try {
        const std::uint64_t run_seed = derive_seed(seed, {si, r});
        const auto idx = stratified_sample(y_train, size, run_seed);
        const auto model = fit_selected(take_rows(X_train, idx), take_labels(y_train, idx),
                                        derive_seed(run_seed, {1}), options);
        point.accuracies[r] = accuracy(model, X_test, y_test);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, runs));
    {
      std::vector<std::jthread> pool;
      for (std::size_t t = 1; t < threads; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t r = t; r < runs; r += threads) work(r);
        });
      }
      for (std::size_t r = 0; r < runs; r += threads) work(r);
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    point.mean = std::accumulate(point.accuracies.begin(), point.accuracies.end(), 0.0) /
                 static_cast<double>(runs);
    point.p10 = percentile(point.accuracies, 0.10);
    point.p90 = percentile(point.accuracies, 0.90);
    curve.points.push_back(std::move(point));
  }
  return curve;
}

void save_probe(const ProbeModel& model, const fs::path& path) {
  if (!model.binary()) throw ContractError("text probe format holds binary probes only");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", model.lambda);
  out << "lambda " << buf;
  std::snprintf(buf, sizeof buf, "%.17g", model.bias[0]);
  out << " bias " << buf << '\n';
  for (Eigen::Index j = 0; j < model.width(); ++j) {
    if (model.weights(0, j) != 0.0) {
      std::snprintf(buf, sizeof buf, "%.17g", model.weights(0, j));
      out << j << ' ' << buf << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ProbeModel load_probe(const fs::path& path, Eigen::Index width) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string k1, k2;
  ProbeModel model;
  double bias = 0.0;
  if (!(hs >> k1 >> model.lambda >> k2 >> bias) || k1 != "lambda" || k2 != "bias") {
    throw FormatError(path.string() + ": expected 'lambda <value> bias <value>'");
  }
  model.bias = Eigen::VectorXd::Constant(1, bias);
  model.weights = Eigen::MatrixXd::Zero(1, width);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long idx = -1;
    double w = 0.0;
    if (!(ls >> idx >> w) || idx < 0) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 'index weight'");
    }
    if (idx >= width) {
      throw DimensionMismatchError("probe weight index " + std::to_string(idx) +
                                   " exceeds feature width " + std::to_string(width));
    }
    model.weights(0, static_cast<Eigen::Index>(idx)) = w;
  }
  model.nnz = count_nonzero(model.weights);
  return model;
}

void write_curve_csv(const fs::path& path, const EfficiencyCurve& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "size,runs,mean,p10,p90\n";
  out.precision(9);
  for (const auto& p : curve.points) {
    out << p.size << ',' << p.runs << ',' << p.mean << ',' << p.p10 << ',' << p.p90 << '\n';
  }
}

}  // namespace bytelm
