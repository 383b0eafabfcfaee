#include "cpce/pce.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "cpce/errors.hpp"

namespace cpce {

void validate(const Dataset& data) {
  if (data.outputs.size() < 1) {
    throw std::invalid_argument("dataset is empty");
  }
  if (data.inputs.rows() != data.outputs.size()) {
    throw std::invalid_argument("dataset has " + std::to_string(data.inputs.rows()) +
                                " input rows but " + std::to_string(data.outputs.size()) +
                                " outputs");
  }
  if (!data.inputs.allFinite() || !data.outputs.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite values");
  }
}

PceModel::PceModel(MultiIndexSet basis, InputSpec input_spec, Eigen::VectorXd coefficients,
                   Eigen::VectorXd hat_diag, Eigen::VectorXd loo_residuals,
                   RowMatrix loo_corrections, std::optional<Dataset> training_snapshot,
                   double condition_number)
    : basis_(std::move(basis)),
      input_spec_(std::move(input_spec)),
      coefficients_(std::move(coefficients)),
      hat_diag_(std::move(hat_diag)),
      loo_residuals_(std::move(loo_residuals)),
      loo_corrections_(std::move(loo_corrections)),
      training_snapshot_(std::move(training_snapshot)),
      condition_number_(condition_number) {
  const auto K = static_cast<Eigen::Index>(basis_.size());
  const auto M = loo_residuals_.size();
  if (input_spec_.dim() != basis_.input_dim()) {
    throw std::invalid_argument("PceModel: input spec and basis dimensions differ");
  }
  if (coefficients_.size() != K) {
    throw std::invalid_argument("PceModel: coefficient count does not match basis size");
  }
  if (hat_diag_.size() != M || loo_corrections_.rows() != M || loo_corrections_.cols() != K) {
    throw std::invalid_argument("PceModel: LOO arrays have inconsistent shapes");
  }
  if (M < K) {
    throw std::invalid_argument("PceModel: fewer samples than basis terms");
  }
}

double PceModel::predict(std::span<const double> x) const {
  return eval_basis_at(x, input_spec_, basis_).dot(coefficients_);
}

Eigen::VectorXd PceModel::loo_predict(std::span<const double> x) const {
  const Eigen::VectorXd row = eval_basis_at(x, input_spec_, basis_);
  return loo_predict_from_row(row, row.dot(coefficients_));
}

Eigen::VectorXd PceModel::loo_predict_from_row(const Eigen::VectorXd& basis_row,
                                               double center) const {
  Eigen::VectorXd out = -(loo_corrections_ * basis_row);
  out.array() += center;
  return out;
}

Eigen::MatrixXd design_matrix(const RowMatrix& inputs, const InputSpec& spec,
                              const MultiIndexSet& basis) {
  if (static_cast<std::size_t>(inputs.cols()) != spec.dim()) {
    throw std::invalid_argument("design_matrix: inputs have " + std::to_string(inputs.cols()) +
                                " columns, expected " + std::to_string(spec.dim()));
  }
  Eigen::MatrixXd D(inputs.rows(), static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index m = 0; m < inputs.rows(); ++m) {
    std::span<const double> x(inputs.data() + m * inputs.cols(),
                              static_cast<std::size_t>(inputs.cols()));
    D.row(m) = eval_basis_at(x, spec, basis).transpose();
  }
  return D;
}

namespace {

void require_determined(Eigen::Index M, Eigen::Index K) {
  if (M < K) {
    throw UnderdeterminedError("underdetermined: M=" + std::to_string(M) + " < K=" +
                               std::to_string(K));
  }
}

double triangular_condition_number(const Eigen::MatrixXd& R) {
  const Eigen::VectorXd sigma = Eigen::BDCSVD<Eigen::MatrixXd>(R).singularValues();
  const double smallest = sigma[sigma.size() - 1];
  if (!(smallest > 0.0)) return std::numeric_limits<double>::infinity();
  return sigma[0] / smallest;
}

}  // namespace

PceModel fit(const Dataset& data, const MultiIndexSet& basis, const InputSpec& spec) {
  validate(data);
  const auto M = static_cast<Eigen::Index>(data.size());
  const auto K = static_cast<Eigen::Index>(basis.size());
  require_determined(M, K);

  const Eigen::MatrixXd D = design_matrix(data.inputs, spec, basis);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(D);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(K).triangularView<Eigen::Upper>();

  const double cond = triangular_condition_number(R);
  if (!(cond <= kMaxConditionNumber)) {
    throw RankDeficientError("rank deficient: condition number " + std::to_string(cond) +
                             " exceeds 1e12");
  }

  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(M, K);
  const auto upper = R.triangularView<Eigen::Upper>();

  Eigen::VectorXd coefficients = upper.solve(Q.transpose() * data.outputs);
  // Rows of Q have squared norms equal to the hat-matrix diagonal.
  Eigen::VectorXd hat_diag = Q.rowwise().squaredNorm();

  const Eigen::VectorXd residuals = data.outputs - D * coefficients;
  Eigen::VectorXd loo_residuals(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double gap = 1.0 - hat_diag[m];
    if (!(gap >= kMinLeverageGap)) {
      throw LeverageError("leverage: 1-h_mm=" + std::to_string(gap) + " below 1e-10 at sample " +
                          std::to_string(m + 1));
    }
    loo_residuals[m] = residuals[m] / gap;
  }

  // Column m of R^{-1} Q^T equals (D^T D)^{-1} d_m since d_m = R^T q_m.
  const Eigen::MatrixXd leverage_dirs = upper.solve(Q.transpose());
  RowMatrix loo_corrections = leverage_dirs.transpose();
  loo_corrections.array().colwise() *= loo_residuals.array();

  return PceModel(basis, spec, std::move(coefficients), std::move(hat_diag),
                  std::move(loo_residuals), std::move(loo_corrections), data, cond);
}

BruteForceLoo brute_force_loo(const Dataset& data, const MultiIndexSet& basis,
                              const InputSpec& spec, const RowMatrix& test_points) {
  validate(data);
  const auto M = static_cast<Eigen::Index>(data.size());
  const auto K = static_cast<Eigen::Index>(basis.size());
  require_determined(M - 1, K);

  const Eigen::MatrixXd D = design_matrix(data.inputs, spec, basis);
  const Eigen::MatrixXd D_test = test_points.rows() > 0
                                     ? design_matrix(test_points, spec, basis)
                                     : Eigen::MatrixXd(0, K);

  BruteForceLoo out{Eigen::VectorXd(M), RowMatrix(test_points.rows(), M)};
  Eigen::MatrixXd D_sub(M - 1, K);
  Eigen::VectorXd y_sub(M - 1);
  for (Eigen::Index m = 0; m < M; ++m) {
    if (m > 0) {
      D_sub.topRows(m) = D.topRows(m);
      y_sub.head(m) = data.outputs.head(m);
    }
    if (m < M - 1) {
      D_sub.bottomRows(M - 1 - m) = D.bottomRows(M - 1 - m);
      y_sub.tail(M - 1 - m) = data.outputs.tail(M - 1 - m);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D_sub);
    if (qr.rank() < K) {
      throw RankDeficientError("rank deficient: design without sample " + std::to_string(m + 1) +
                               " has rank " + std::to_string(qr.rank()));
    }
    const Eigen::VectorXd c = qr.solve(y_sub);
    out.residuals[m] = data.outputs[m] - D.row(m).dot(c);
    if (D_test.rows() > 0) out.predictions.col(m) = D_test * c;
  }
  return out;
}

double pce_variance(const PceModel& model) {
  const auto& basis = model.basis();
  const auto& c = model.coefficients();
  double var = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (!basis[k].is_zero()) var += c[static_cast<Eigen::Index>(k)] * c[static_cast<Eigen::Index>(k)];
  }
  return var;
}

double output_variance(const PceModel& model, VarianceEstimator estimator) {
  if (estimator == VarianceEstimator::Coefficients) return pce_variance(model);
  const auto& snapshot = model.training_snapshot();
  if (!snapshot) {
    throw std::invalid_argument("empirical variance needs the training data, which this model lacks");
  }
  const auto& y = snapshot->outputs;
  if (y.size() < 2) return 0.0;
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

double relative_loo_error(const PceModel& model, VarianceEstimator estimator) {
  const double var = output_variance(model, estimator);
  if (!(var > 1e-300)) {
    throw ZeroVarianceError("zero variance: output variance estimate is " + std::to_string(var));
  }
  return model.loo_residuals().squaredNorm() / static_cast<double>(model.num_samples()) / var;
}

}  // namespace cpce
