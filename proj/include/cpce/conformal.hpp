#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cpce/pce.hpp"

namespace cpce {

enum class Method { Jackknife, JackknifePlus };
enum class Score { Absolute, Normalized };

std::string_view to_string(Method method);
std::string_view to_string(Score score);

struct ConformalConfig {
  Method method = Method::JackknifePlus;
  Score score = Score::Absolute;
  double significance = 0.05;
  VarianceEstimator variance = VarianceEstimator::Coefficients;
};

/// Throws std::invalid_argument unless 0 < significance < 1.
void validate(const ConformalConfig& cfg);

/// Closed interval [lower, upper] around the point prediction `center`.
/// Bounds may be infinite when the calibration set is too small.
struct PredictionInterval {
  double lower;
  double upper;
  double center;

  double width() const { return upper - lower; }
  bool bounded() const { return std::isfinite(lower) && std::isfinite(upper); }
  bool contains(double y) const { return lower <= y && y <= upper; }
};

/// 1-based rank ceil((1-s)(M+1)) of the upper finite-sample quantile.
std::size_t upper_quantile_rank(std::size_t count, double significance);

/// ceil((1-s)(M+1))-th smallest value, or +inf when that rank exceeds M.
double finite_quantile_upper(std::span<const double> values, double significance);

/// floor(s(M+1))-th smallest value, or -inf when that rank is 0. Uses the
/// rank M+1-upper_quantile_rank so that it mirrors finite_quantile_upper
/// on negated values exactly.
double finite_quantile_lower(std::span<const double> values, double significance);

/// Non-conformity scores |r_m^LOO|, divided by sqrt(Var(Y)) when Normalized.
/// Throws ZeroVarianceError for Normalized scores when Var(Y) <= 1e-300.
std::vector<double> scores(const PceModel& model, const ConformalConfig& cfg);

/// Precomputes everything that does not depend on the test point so that a
/// batch of intervals costs one quantile selection (jackknife) or one
/// O(MK) LOO prediction plus two selections (jackknife+) per point.
class ConformalPredictor {
 public:
  ConformalPredictor(const PceModel& model, ConformalConfig cfg);

  const ConformalConfig& config() const { return cfg_; }
  /// Score quantile rescaled to output units; the jackknife half-width.
  double half_width() const { return half_width_; }
  /// Scores a_m in output units used to build jackknife+ bounds.
  const std::vector<double>& rescaled_scores() const { return rescaled_scores_; }

  PredictionInterval interval(std::span<const double> x) const;
  PredictionInterval interval_from_row(const Eigen::VectorXd& basis_row) const;

 private:
  const PceModel* model_;
  ConformalConfig cfg_;
  double half_width_;
  std::vector<double> rescaled_scores_;
};

PredictionInterval jackknife_interval(const PceModel& model, std::span<const double> x,
                                      const ConformalConfig& cfg);

PredictionInterval jackknife_plus_interval(const PceModel& model, std::span<const double> x,
                                           const ConformalConfig& cfg);

/// Fraction of truths inside their (closed) interval.
double empirical_coverage(std::span<const PredictionInterval> intervals,
                          std::span<const double> truths);

}  // namespace cpce
