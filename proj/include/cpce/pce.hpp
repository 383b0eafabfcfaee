#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "cpce/basis.hpp"

namespace cpce {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Experimental design: M input points (rows) and their model responses.
struct Dataset {
  RowMatrix inputs;
  Eigen::VectorXd outputs;

  std::size_t size() const { return static_cast<std::size_t>(outputs.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(inputs.cols()); }
  std::span<const double> point(std::size_t m) const {
    return {inputs.data() + m * inputs.cols(), static_cast<std::size_t>(inputs.cols())};
  }
};

/// Throws std::invalid_argument unless rows match, M >= 1 and every value is finite.
void validate(const Dataset& data);

/// Thresholds applied by fit().
inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr double kMinLeverageGap = 1e-10;

enum class VarianceEstimator {
  Coefficients,  // sum of squared non-constant coefficients
  Empirical,     // unbiased sample variance of the training outputs
};

/// Least-squares PCE together with everything needed to produce
/// leave-one-out residuals and predictions without refitting.
class PceModel {
 public:
  PceModel(MultiIndexSet basis, InputSpec input_spec, Eigen::VectorXd coefficients,
           Eigen::VectorXd hat_diag, Eigen::VectorXd loo_residuals, RowMatrix loo_corrections,
           std::optional<Dataset> training_snapshot = std::nullopt,
           double condition_number = std::numeric_limits<double>::quiet_NaN());

  const MultiIndexSet& basis() const { return basis_; }
  const InputSpec& input_spec() const { return input_spec_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const Eigen::VectorXd& hat_diag() const { return hat_diag_; }
  const Eigen::VectorXd& loo_residuals() const { return loo_residuals_; }
  /// Row m holds (D^T D)^{-1} d_m * r_m^LOO.
  const RowMatrix& loo_corrections() const { return loo_corrections_; }
  /// Present for models produced by fit(); absent for deserialized models.
  const std::optional<Dataset>& training_snapshot() const { return training_snapshot_; }
  /// 2-norm condition number of the design matrix; NaN when unknown.
  double condition_number() const { return condition_number_; }

  std::size_t num_terms() const { return basis_.size(); }
  std::size_t num_samples() const { return static_cast<std::size_t>(loo_residuals_.size()); }

  double predict(std::span<const double> x) const;

  /// Predictions of the M leave-one-out models at x, in O(MK).
  Eigen::VectorXd loo_predict(std::span<const double> x) const;

  /// Same as loo_predict but reuses an already computed basis row and prediction.
  Eigen::VectorXd loo_predict_from_row(const Eigen::VectorXd& basis_row, double center) const;

 private:
  MultiIndexSet basis_;
  InputSpec input_spec_;
  Eigen::VectorXd coefficients_;
  Eigen::VectorXd hat_diag_;
  Eigen::VectorXd loo_residuals_;
  RowMatrix loo_corrections_;
  std::optional<Dataset> training_snapshot_;
  double condition_number_;
};

/// M x K matrix of basis evaluations at the given physical input points.
Eigen::MatrixXd design_matrix(const RowMatrix& inputs, const InputSpec& spec,
                              const MultiIndexSet& basis);

/// Fits by Householder QR of the design matrix. Throws UnderdeterminedError
/// (M < K), RankDeficientError (condition number above kMaxConditionNumber)
/// or LeverageError (1 - h_mm below kMinLeverageGap).
PceModel fit(const Dataset& data, const MultiIndexSet& basis, const InputSpec& spec);

struct BruteForceLoo {
  Eigen::VectorXd residuals;  // y_m - mu_{~m}(x_m)
  RowMatrix predictions;      // predictions(j, m) = mu_{~m}(test point j)
};

/// Reference implementation that refits the expansion M times, each time
/// without one sample. Test points are rows of test_points (may be empty).
BruteForceLoo brute_force_loo(const Dataset& data, const MultiIndexSet& basis,
                              const InputSpec& spec, const RowMatrix& test_points = RowMatrix());

double pce_variance(const PceModel& model);

/// Var(Y) by the selected estimator. Empirical needs the training snapshot.
double output_variance(const PceModel& model,
                       VarianceEstimator estimator = VarianceEstimator::Coefficients);

/// Mean squared LOO residual over Var(Y). Throws ZeroVarianceError if
/// Var(Y) <= 1e-300.
double relative_loo_error(const PceModel& model,
                          VarianceEstimator estimator = VarianceEstimator::Coefficients);

}  // namespace cpce
