// SPDX-License-Identifier: Apache-2.0
#pragma once

// L1-regularized logistic regression probes fitted by proximal gradient
// descent (ISTA with backtracking), plus regularization-path selection and
// the labeled-data efficiency harness.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace bytelm {

using FeatureMatrix = Eigen::MatrixXd;  // N x H, one example per row

struct SolverOptions {
  double tolerance = 1e-7;  // relative objective change
  int max_iterations = 5000;
};

/// Binary probes keep a 1 x H weight row and predict class 1 with
/// probability sigmoid(w.x + b). Multinomial probes keep k x H weights.
struct ProbeModel {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  double lambda = 0.0;
  int n_classes = 2;
  std::size_t nnz = 0;
  int iterations = 0;
  double objective = 0.0;

  bool binary() const { return weights.rows() == 1; }
  Eigen::Index width() const { return weights.cols(); }
};

/// Smallest lambda whose optimum has all-zero weights:
/// (1/N) max_j |sum_i X_ij (y_i - p)| with p the class-1 frequency.
double lambda_max(const FeatureMatrix& X, std::span<const int> y);

/// Minimizes (1/N) sum logloss + lambda ||w||_1 with the bias unpenalized.
ProbeModel fit_logreg_l1(const FeatureMatrix& X, std::span<const int> y, double lambda,
                         const SolverOptions& options = {},
                         const ProbeModel* warm_start = nullptr);

/// Softmax regression with elementwise L1 on the k x H weights.
ProbeModel fit_multinomial_l1(const FeatureMatrix& X, std::span<const int> y, double lambda,
                              const SolverOptions& options = {},
                              const ProbeModel* warm_start = nullptr);

/// Multinomial lambda_max: (1/N) max_{j,c} |sum_i X_ij (Y_ic - p_c)|.
double lambda_max_multinomial(const FeatureMatrix& X, std::span<const int> y);

/// Dispatches to the binary or multinomial solver by label count.
ProbeModel fit_l1(const FeatureMatrix& X, std::span<const int> y, double lambda,
                  const SolverOptions& options = {}, const ProbeModel* warm_start = nullptr);

/// Value of the regularized objective at `model`.
double probe_objective(const ProbeModel& model, const FeatureMatrix& X, std::span<const int> y);

/// N x k class probabilities (k = 2 for binary models).
Eigen::MatrixXd predict_proba(const ProbeModel& model, const FeatureMatrix& X);

/// Binary: class 1 iff p >= 0.5. Multinomial: argmax, ties to the lower
/// class index.
std::vector<int> predict(const ProbeModel& model, const FeatureMatrix& X);
double accuracy(const ProbeModel& model, const FeatureMatrix& X, std::span<const int> y);

struct PathPoint {
  double lambda = 0.0;
  std::size_t nnz = 0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double objective = 0.0;
};

struct PathResult {
  ProbeModel best;
  std::size_t best_index = 0;
  std::vector<PathPoint> path;  // descending lambda
};

/// `n_lambdas` values log-spaced over [1e-4 * lambda_max, lambda_max],
/// fitted from the largest down with warm starts. Picks the best validation
/// accuracy, ties going to the larger lambda.
PathResult fit_path(const FeatureMatrix& X_train, std::span<const int> y_train,
                    const FeatureMatrix& X_val, std::span<const int> y_val,
                    std::size_t n_lambdas, const SolverOptions& options = {});

/// Stratified sample of `n` row indices: per-class counts follow the class
/// proportions, remainders assigned by largest fractional part.
std::vector<std::size_t> stratified_sample(std::span<const int> y, std::size_t n,
                                           std::uint64_t seed);

struct EfficiencyOptions {
  std::size_t n_lambdas = 12;
  std::size_t min_validated = 20;      // below this size, use a fixed lambda
  double validation_fraction = 0.25;
  double small_sample_lambda_ratio = 0.05;  // fixed lambda = ratio * lambda_max
  SolverOptions solver;
  std::size_t threads = 1;
};

/// Fits a probe on a labeled sample the way the efficiency harness does:
/// a stratified validation split plus fit_path for model selection, then a
/// refit on the whole sample at the selected lambda. Samples smaller than
/// `min_validated` use the fixed small lambda instead.
ProbeModel fit_selected(const FeatureMatrix& X, std::span<const int> y, std::uint64_t seed,
                        const EfficiencyOptions& options = {});

struct EfficiencyPoint {
  std::size_t size = 0;
  std::size_t runs = 0;
  double mean = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  std::vector<double> accuracies;
};

struct EfficiencyCurve {
  std::vector<EfficiencyPoint> points;
  std::vector<std::size_t> skipped;  // sizes smaller than the class count
};

/// Test accuracy as a function of labeled-set size, `runs` resamples per
/// size, evaluated on a fixed test set.
EfficiencyCurve data_efficiency_curve(const FeatureMatrix& X_train, std::span<const int> y_train,
                                      const FeatureMatrix& X_test, std::span<const int> y_test,
                                      std::span<const std::size_t> sizes, std::size_t runs,
                                      std::uint64_t seed, const EfficiencyOptions& options = {});

/// Linear-interpolation percentile (q in [0, 1]).
double percentile(std::vector<double> values, double q);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

/// Text form: `lambda <v> bias <v>` then `index weight` per nonzero weight.
/// Binary probes only.
void save_probe(const ProbeModel& model, const std::filesystem::path& path);
ProbeModel load_probe(const std::filesystem::path& path, Eigen::Index width);

void write_curve_csv(const std::filesystem::path& path, const EfficiencyCurve& curve);

}  // namespace bytelm
