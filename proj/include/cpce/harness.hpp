#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpce/benchmarks.hpp"
#include "cpce/conformal.hpp"

namespace cpce {

struct ExperimentConfig {
  std::string benchmark;
  std::vector<unsigned> degrees;
  std::vector<unsigned> oversampling;
  std::vector<Method> methods{Method::Jackknife, Method::JackknifePlus};
  std::vector<Score> scores{Score::Absolute};
  double significance = 0.05;
  std::size_t n_seeds = 100;
  std::size_t test_size = 10000;
  std::string output;
  VarianceEstimator variance = VarianceEstimator::Coefficients;
};

/// Throws std::invalid_argument on empty grids, s outside (0,1), zero seeds
/// or test size, or an unknown benchmark name.
void validate(const ExperimentConfig& config);

/// Reads a config from JSON whose keys mirror the ExperimentConfig fields.
/// Missing optional keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Desk-scale profile: 20 seeds and 2000 test points.
void apply_quick_profile(ExperimentConfig& config);

Method parse_method(std::string_view text);
Score parse_score(std::string_view text);

struct CellCoordinates {
  std::string benchmark;
  unsigned degree = 0;
  unsigned oversampling = 0;
  Method method = Method::JackknifePlus;
  Score score = Score::Absolute;
  std::uint64_t seed = 0;
};

struct RunRecord {
  CellCoordinates cell;
  double coverage = std::numeric_limits<double>::quiet_NaN();
  double mean_width = std::numeric_limits<double>::quiet_NaN();
  double median_width = std::numeric_limits<double>::quiet_NaN();
  double rel_loo_error = std::numeric_limits<double>::quiet_NaN();
  double condition_number = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_unbounded = 0;
  /// One-line reason when the cell failed; empty on success.
  std::string failure;

  bool ok() const { return failure.empty(); }
};

/// Runs one cell: sample train/test sets from independent streams, fit,
/// conformalize and score coverage. Fit and variance errors are captured
/// into RunRecord::failure.
RunRecord run_cell(const Benchmark& bench, const CellCoordinates& cell, double significance,
                   std::size_t test_size,
                   VarianceEstimator variance = VarianceEstimator::Coefficients);

/// All (method, score) records for one (P, C, seed) sharing a single fit.
std::vector<RunRecord> run_seed(const Benchmark& bench, unsigned degree, unsigned oversampling,
                                std::uint64_t seed, const std::vector<Method>& methods,
                                const std::vector<Score>& scores, double significance,
                                std::size_t test_size,
                                VarianceEstimator variance = VarianceEstimator::Coefficients);

struct SummaryStats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
};

/// Box-plot statistics; quartiles interpolate linearly between order statistics.
SummaryStats summarize(std::vector<double> values);

struct CellAggregate {
  std::string benchmark;
  unsigned degree = 0;
  unsigned oversampling = 0;
  Method method = Method::JackknifePlus;
  Score score = Score::Absolute;
  std::size_t n_runs = 0;
  std::size_t n_failed = 0;
  std::size_t n_unbounded_runs = 0;
  SummaryStats coverage;
  SummaryStats width;  // over per-seed median widths
};

struct CoverageReport {
  std::vector<RunRecord> records;  // sorted by coordinates, failures included
  std::vector<CellAggregate> aggregates;

  std::vector<RunRecord> failures() const;
};

/// Sorts records by (benchmark, P, C, method, score, seed) and aggregates
/// per (benchmark, P, C, method, score) over the successful runs.
CoverageReport aggregate(std::vector<RunRecord> records);

CoverageReport run_grid(const Benchmark& bench, const ExperimentConfig& config);
CoverageReport run_grid(const ExperimentConfig& config);

std::string runs_csv(const CoverageReport& report);
std::string aggregate_csv(const CoverageReport& report);
nlohmann::ordered_json report_json(const CoverageReport& report);

/// Parses runs_csv output back into records (failed numeric fields become NaN).
std::vector<RunRecord> records_from_csv(std::string_view text);

enum class ReportFormat { Csv, Json };

/// Writes runs.csv and aggregate.csv (Csv) or report.json (Json) into
/// `directory`, creating it if needed. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const CoverageReport& report, ReportFormat format,
                                               const std::filesystem::path& directory);

}  // namespace cpce
