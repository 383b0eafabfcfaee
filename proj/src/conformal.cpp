#include "cpce/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cpce/errors.hpp"

namespace cpce {

std::string_view to_string(Method method) {
  return method == Method::Jackknife ? "jackknife" : "jackknife+";
}

std::string_view to_string(Score score) {
  return score == Score::Absolute ? "absolute" : "normalized";
}

void validate(const ConformalConfig& cfg) {
  if (!(cfg.significance > 0.0 && cfg.significance < 1.0)) {
    throw std::invalid_argument("significance must lie in (0,1), got " +
                                std::to_string(cfg.significance));
  }
}

std::size_t upper_quantile_rank(std::size_t count, double significance) {
  if (!(significance > 0.0 && significance < 1.0)) {
    throw std::invalid_argument("significance must lie in (0,1)");
  }
  const double target = (1.0 - significance) * static_cast<double>(count + 1);
  // (1-s)(M+1) is often an integer in exact arithmetic (e.g. s=0.05, M=19)
  // but lands one ulp above it in floating point; snap before the ceiling.
  const double nearest = std::round(target);
  const double rank = std::abs(target - nearest) <= 1e-9 * std::max(1.0, target)
                          ? nearest
                          : std::ceil(target);
  return static_cast<std::size_t>(rank);
}

namespace {

double kth_smallest(std::span<const double> values, std::size_t rank) {
  std::vector<double> work(values.begin(), values.end());
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

void require_nonempty(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
}

}  // namespace

double finite_quantile_upper(std::span<const double> values, double significance) {
  require_nonempty(values);
  const std::size_t rank = upper_quantile_rank(values.size(), significance);
  if (rank > values.size()) return std::numeric_limits<double>::infinity();
  return kth_smallest(values, rank);
}

double finite_quantile_lower(std::span<const double> values, double significance) {
  require_nonempty(values);
  const std::size_t upper_rank = upper_quantile_rank(values.size(), significance);
  if (upper_rank > values.size()) return -std::numeric_limits<double>::infinity();
  return kth_smallest(values, values.size() + 1 - upper_rank);
}

namespace {

double score_scale(const PceModel& model, const ConformalConfig& cfg) {
  if (cfg.score == Score::Absolute) return 1.0;
  const double var = output_variance(model, cfg.variance);
  if (!(var > 1e-300)) {
    throw ZeroVarianceError("zero variance: cannot normalize scores, variance estimate is " +
                            std::to_string(var));
  }
  return std::sqrt(var);
}

}  // namespace

std::vector<double> scores(const PceModel& model, const ConformalConfig& cfg) {
  const double scale = score_scale(model, cfg);
  const auto& r = model.loo_residuals();
  std::vector<double> out(static_cast<std::size_t>(r.size()));
  for (Eigen::Index m = 0; m < r.size(); ++m) {
    out[static_cast<std::size_t>(m)] = std::abs(r[m]) / scale;
  }
  return out;
}

ConformalPredictor::ConformalPredictor(const PceModel& model, ConformalConfig cfg)
    : model_(&model), cfg_(cfg) {
  validate(cfg_);
  const double scale = score_scale(model, cfg_);
  const auto raw = scores(model, cfg_);
  half_width_ = finite_quantile_upper(raw, cfg_.significance) * scale;
  rescaled_scores_.resize(raw.size());
  std::transform(raw.begin(), raw.end(), rescaled_scores_.begin(),
                 [scale](double a) { return a * scale; });
}

PredictionInterval ConformalPredictor::interval(std::span<const double> x) const {
  return interval_from_row(eval_basis_at(x, model_->input_spec(), model_->basis()));
}

PredictionInterval ConformalPredictor::interval_from_row(const Eigen::VectorXd& basis_row) const {
  const double center = basis_row.dot(model_->coefficients());
  if (cfg_.method == Method::Jackknife) {
    return {center - half_width_, center + half_width_, center};
  }

  const Eigen::VectorXd loo = model_->loo_predict_from_row(basis_row, center);
  const std::size_t M = rescaled_scores_.size();
  std::vector<double> lows(M);
  std::vector<double> highs(M);
  for (std::size_t m = 0; m < M; ++m) {
    const double mu = loo[static_cast<Eigen::Index>(m)];
    lows[m] = mu - rescaled_scores_[m];
    highs[m] = mu + rescaled_scores_[m];
  }
  return {finite_quantile_lower(lows, cfg_.significance),
          finite_quantile_upper(highs, cfg_.significance), center};
}

PredictionInterval jackknife_interval(const PceModel& model, std::span<const double> x,
                                      const ConformalConfig& cfg) {
  ConformalConfig jk = cfg;
  jk.method = Method::Jackknife;
  return ConformalPredictor(model, jk).interval(x);
}

PredictionInterval jackknife_plus_interval(const PceModel& model, std::span<const double> x,
                                           const ConformalConfig& cfg) {
  ConformalConfig jkp = cfg;
  jkp.method = Method::JackknifePlus;
  return ConformalPredictor(model, jkp).interval(x);
}

double empirical_coverage(std::span<const PredictionInterval> intervals,
                          std::span<const double> truths) {
  if (intervals.size() != truths.size()) {
    throw std::invalid_argument("coverage: " + std::to_string(intervals.size()) +
                                " intervals but " + std::to_string(truths.size()) + " truths");
  }
  if (intervals.empty()) {
    throw std::invalid_argument("coverage of an empty test set");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].contains(truths[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(intervals.size());
}

}  // namespace cpce
