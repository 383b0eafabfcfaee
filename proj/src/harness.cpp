#include "cpce/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "cpce/csv.hpp"
#include "cpce/errors.hpp"

namespace cpce {

Method parse_method(std::string_view text) {
  if (text == "jackknife" || text == "jk") return Method::Jackknife;
  if (text == "jackknife+" || text == "jk+") return Method::JackknifePlus;
  throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

Score parse_score(std::string_view text) {
  if (text == "absolute" || text == "abs") return Score::Absolute;
  if (text == "normalized" || text == "norm") return Score::Normalized;
  throw std::invalid_argument("unknown score '" + std::string(text) + "'");
}

namespace {

const Benchmark& resolve_benchmark(const std::string& name) {
  const auto id = parse_benchmark(name);
  if (!id) throw std::invalid_argument("unknown benchmark '" + name + "'");
  return benchmark(*id);
}

}  // namespace

void validate(const ExperimentConfig& config) {
  if (config.degrees.empty()) throw std::invalid_argument("config: degrees is empty");
  if (config.oversampling.empty()) throw std::invalid_argument("config: oversampling is empty");
  if (config.methods.empty()) throw std::invalid_argument("config: methods is empty");
  if (config.scores.empty()) throw std::invalid_argument("config: scores is empty");
  if (!(config.significance > 0.0 && config.significance < 1.0)) {
    throw std::invalid_argument("config: significance must lie in (0,1)");
  }
  if (config.n_seeds == 0) throw std::invalid_argument("config: n_seeds must be >= 1");
  if (config.test_size == 0) throw std::invalid_argument("config: test_size must be >= 1");
  for (unsigned c : config.oversampling) {
    if (c == 0) throw std::invalid_argument("config: oversampling values must be >= 1");
  }
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  static const char* const known[] = {"benchmark", "degrees",  "oversampling", "methods",
                                      "scores",    "significance", "n_seeds", "test_size",
                                      "output",    "variance"};
  ExperimentConfig config;
  try {
    if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
        throw std::invalid_argument("config: unknown key '" + key + "'");
      }
    }
    config.benchmark = doc.at("benchmark").get<std::string>();
    config.degrees = doc.at("degrees").get<std::vector<unsigned>>();
    config.oversampling = doc.at("oversampling").get<std::vector<unsigned>>();
    if (doc.contains("methods")) {
      config.methods.clear();
      for (const auto& m : doc["methods"]) config.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (doc.contains("scores")) {
      config.scores.clear();
      for (const auto& s : doc["scores"]) config.scores.push_back(parse_score(s.get<std::string>()));
    }
    if (doc.contains("significance")) config.significance = doc["significance"].get<double>();
    if (doc.contains("n_seeds")) config.n_seeds = doc["n_seeds"].get<std::size_t>();
    if (doc.contains("test_size")) config.test_size = doc["test_size"].get<std::size_t>();
    if (doc.contains("output")) config.output = doc["output"].get<std::string>();
    if (doc.contains("variance")) {
      const auto v = doc["variance"].get<std::string>();
      if (v == "coefficients") {
        config.variance = VarianceEstimator::Coefficients;
      } else if (v == "empirical") {
        config.variance = VarianceEstimator::Empirical;
      } else {
        throw std::invalid_argument("config: variance must be 'coefficients' or 'empirical'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  (void)resolve_benchmark(config.benchmark);
  validate(config);
  return config;
}

void apply_quick_profile(ExperimentConfig& config) {
  config.n_seeds = 20;
  config.test_size = 2000;
}

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RunRecord failed_record(CellCoordinates cell, std::string reason) {
  RunRecord rec;
  rec.cell = std::move(cell);
  rec.failure = std::move(reason);
  return rec;
}

}  // namespace

std::vector<RunRecord> run_seed(const Benchmark& bench, unsigned degree, unsigned oversampling,
                                std::uint64_t seed, const std::vector<Method>& methods,
                                const std::vector<Score>& scores, double significance,
                                std::size_t test_size, VarianceEstimator variance) {
  std::vector<CellCoordinates> cells;
  for (Method method : methods) {
    for (Score score : scores) {
      cells.push_back({bench.name, degree, oversampling, method, score, seed});
    }
  }
  auto fail_all = [&cells](const std::string& reason) {
    std::vector<RunRecord> out;
    for (const auto& cell : cells) out.push_back(failed_record(cell, reason));
    return out;
  };

  const MultiIndexSet basis = build_total_degree_set(bench.dim(), degree);
  const std::size_t M = design_size(bench, degree, oversampling);
  if (M < basis.size()) {
    return fail_all("underdetermined: M=" + std::to_string(M) + " < K=" +
                    std::to_string(basis.size()));
  }

  const Dataset train =
      sample_design(bench, M, cell_seed(bench.name, degree, oversampling, seed, Stream::Train));
  const Dataset test = sample_design(
      bench, test_size, cell_seed(bench.name, degree, oversampling, seed, Stream::Test));

  std::optional<PceModel> model;
  try {
    model.emplace(fit(train, basis, bench.input_spec));
  } catch (const FitError& e) {
    return fail_all(e.what());
  }

  double rel_error = std::numeric_limits<double>::quiet_NaN();
  try {
    rel_error = relative_loo_error(*model, variance);
  } catch (const ZeroVarianceError&) {
    // diagnostic only; left as NaN
  }

  const Eigen::MatrixXd test_rows = design_matrix(test.inputs, bench.input_spec, basis);
  std::vector<RunRecord> out;
  for (const auto& cell : cells) {
    std::optional<ConformalPredictor> predictor;
    try {
      predictor.emplace(*model, ConformalConfig{cell.method, cell.score, significance, variance});
    } catch (const ZeroVarianceError& e) {
      out.push_back(failed_record(cell, e.what()));
      continue;
    }

    std::size_t hits = 0;
    std::size_t unbounded = 0;
    std::vector<double> widths(test_size);
    double width_sum = 0.0;
    for (std::size_t i = 0; i < test_size; ++i) {
      const Eigen::VectorXd row = test_rows.row(static_cast<Eigen::Index>(i)).transpose();
      const PredictionInterval iv = predictor->interval_from_row(row);
      if (iv.contains(test.outputs[static_cast<Eigen::Index>(i)])) ++hits;
      if (!iv.bounded()) ++unbounded;
      widths[i] = iv.width();
      width_sum += widths[i];
    }

    RunRecord rec;
    rec.cell = cell;
    rec.coverage = static_cast<double>(hits) / static_cast<double>(test_size);
    rec.mean_width = width_sum / static_cast<double>(test_size);
    rec.median_width = median_of(std::move(widths));
    rec.rel_loo_error = rel_error;
    rec.condition_number = model->condition_number();
    rec.n_unbounded = unbounded;
    out.push_back(std::move(rec));
  }
  return out;
}

RunRecord run_cell(const Benchmark& bench, const CellCoordinates& cell, double significance,
                   std::size_t test_size, VarianceEstimator variance) {
  if (cell.benchmark != bench.name) {
    throw std::invalid_argument("run_cell: coordinates name benchmark '" + cell.benchmark +
                                "' but '" + bench.name + "' was given");
  }
  return run_seed(bench, cell.degree, cell.oversampling, cell.seed, {cell.method}, {cell.score},
                  significance, test_size, variance)
      .front();
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats stats;
  if (values.empty()) return stats;
  std::sort(values.begin(), values.end());
  auto quantile = [&values](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  stats.median = quantile(0.5);
  stats.q1 = quantile(0.25);
  stats.q3 = quantile(0.75);
  stats.min = values.front();
  stats.max = values.back();
  return stats;
}

std::vector<RunRecord> CoverageReport::failures() const {
  std::vector<RunRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const RunRecord& r) { return !r.ok(); });
  return out;
}

namespace {

auto group_key(const CellCoordinates& c) {
  return std::make_tuple(c.benchmark, c.degree, c.oversampling, static_cast<int>(c.method),
                         static_cast<int>(c.score));
}

}  // namespace

CoverageReport aggregate(std::vector<RunRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tuple_cat(group_key(a.cell), std::make_tuple(a.cell.seed)) <
           std::tuple_cat(group_key(b.cell), std::make_tuple(b.cell.seed));
  });

  CoverageReport report;
  std::size_t begin = 0;
  while (begin < records.size()) {
    std::size_t end = begin;
    const auto key = group_key(records[begin].cell);
    while (end < records.size() && group_key(records[end].cell) == key) ++end;

    CellAggregate agg;
    const auto& c = records[begin].cell;
    agg.benchmark = c.benchmark;
    agg.degree = c.degree;
    agg.oversampling = c.oversampling;
    agg.method = c.method;
    agg.score = c.score;
    agg.n_runs = end - begin;
    std::vector<double> coverage;
    std::vector<double> width;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& r = records[i];
      if (!r.ok()) {
        ++agg.n_failed;
        continue;
      }
      if (r.n_unbounded > 0) ++agg.n_unbounded_runs;
      coverage.push_back(r.coverage);
      width.push_back(r.median_width);
    }
    agg.coverage = summarize(std::move(coverage));
    agg.width = summarize(std::move(width));
    report.aggregates.push_back(std::move(agg));
    begin = end;
  }
  report.records = std::move(records);
  return report;
}

CoverageReport run_grid(const Benchmark& bench, const ExperimentConfig& config) {
  validate(config);
  std::vector<RunRecord> records;
  for (unsigned degree : config.degrees) {
    for (unsigned c : config.oversampling) {
      for (std::size_t seed = 0; seed < config.n_seeds; ++seed) {
        auto batch = run_seed(bench, degree, c, seed, config.methods, config.scores,
                              config.significance, config.test_size, config.variance);
        std::move(batch.begin(), batch.end(), std::back_inserter(records));
      }
    }
  }
  return aggregate(std::move(records));
}

CoverageReport run_grid(const ExperimentConfig& config) {
  return run_grid(resolve_benchmark(config.benchmark), config);
}

namespace {

const std::vector<std::string> kRunColumns = {
    "benchmark", "P",          "C",             "method",      "score",   "seed",
    "coverage",  "mean_width", "median_width", "rel_loo_error", "n_unbounded", "failure"};

std::string number_field(const RunRecord& r, double value) {
  return r.ok() ? format_double(value) : std::string();
}

std::vector<std::string> stats_fields(const SummaryStats& s) {
  return {format_double(s.mean), format_double(s.median), format_double(s.q1),
          format_double(s.q3),   format_double(s.min),    format_double(s.max)};
}

nlohmann::ordered_json json_number(double value) {
  if (std::isfinite(value)) return value;
  return format_double(value);
}

nlohmann::ordered_json stats_json(const SummaryStats& s) {
  return {{"mean", json_number(s.mean)}, {"median", json_number(s.median)},
          {"q1", json_number(s.q1)},     {"q3", json_number(s.q3)},
          {"min", json_number(s.min)},   {"max", json_number(s.max)}};
}

}  // namespace

std::string runs_csv(const CoverageReport& report) {
  CsvTable table{kRunColumns, {}};
  for (const auto& r : report.records) {
    const auto& c = r.cell;
    table.rows.push_back({c.benchmark, std::to_string(c.degree), std::to_string(c.oversampling),
                          std::string(to_string(c.method)), std::string(to_string(c.score)),
                          std::to_string(c.seed), number_field(r, r.coverage),
                          number_field(r, r.mean_width), number_field(r, r.median_width),
                          number_field(r, r.rel_loo_error),
                          r.ok() ? std::to_string(r.n_unbounded) : std::string(), r.failure});
  }
  return to_csv(table);
}

std::string aggregate_csv(const CoverageReport& report) {
  CsvTable table{{"benchmark", "P", "C", "method", "score", "n_runs", "n_failed",
                  "n_unbounded_runs", "coverage_mean", "coverage_median", "coverage_q1",
                  "coverage_q3", "coverage_min", "coverage_max", "width_mean", "width_median",
                  "width_q1", "width_q3", "width_min", "width_max"},
                 {}};
  for (const auto& a : report.aggregates) {
    std::vector<std::string> row = {a.benchmark,
                                    std::to_string(a.degree),
                                    std::to_string(a.oversampling),
                                    std::string(to_string(a.method)),
                                    std::string(to_string(a.score)),
                                    std::to_string(a.n_runs),
                                    std::to_string(a.n_failed),
                                    std::to_string(a.n_unbounded_runs)};
    for (auto& f : stats_fields(a.coverage)) row.push_back(std::move(f));
    for (auto& f : stats_fields(a.width)) row.push_back(std::move(f));
    table.rows.push_back(std::move(row));
  }
  return to_csv(table);
}

nlohmann::ordered_json report_json(const CoverageReport& report) {
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : report.records) {
    const auto& c = r.cell;
    nlohmann::ordered_json j;
    j["benchmark"] = c.benchmark;
    j["P"] = c.degree;
    j["C"] = c.oversampling;
    j["method"] = to_string(c.method);
    j["score"] = to_string(c.score);
    j["seed"] = c.seed;
    if (r.ok()) {
      j["coverage"] = json_number(r.coverage);
      j["mean_width"] = json_number(r.mean_width);
      j["median_width"] = json_number(r.median_width);
      j["rel_loo_error"] = json_number(r.rel_loo_error);
      j["n_unbounded"] = r.n_unbounded;
      j["failure"] = nullptr;
    } else {
      for (const char* key : {"coverage", "mean_width", "median_width", "rel_loo_error",
                              "n_unbounded"}) {
        j[key] = nullptr;
      }
      j["failure"] = r.failure;
    }
    runs.push_back(std::move(j));
  }

  auto aggregates = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"benchmark", a.benchmark},
                          {"P", a.degree},
                          {"C", a.oversampling},
                          {"method", to_string(a.method)},
                          {"score", to_string(a.score)},
                          {"n_runs", a.n_runs},
                          {"n_failed", a.n_failed},
                          {"n_unbounded_runs", a.n_unbounded_runs},
                          {"coverage", stats_json(a.coverage)},
                          {"width", stats_json(a.width)}});
  }
  nlohmann::ordered_json doc;
  doc["runs"] = std::move(runs);
  doc["aggregates"] = std::move(aggregates);
  return doc;
}

std::vector<RunRecord> records_from_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  if (table.header != kRunColumns) throw std::invalid_argument("runs csv: unexpected header");
  auto number = [](const std::string& field) {
    return field.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(field);
  };
  std::vector<RunRecord> out;
  for (const auto& row : table.rows) {
    RunRecord r;
    r.cell.benchmark = row[0];
    r.cell.degree = static_cast<unsigned>(std::stoul(row[1]));
    r.cell.oversampling = static_cast<unsigned>(std::stoul(row[2]));
    r.cell.method = parse_method(row[3]);
    r.cell.score = parse_score(row[4]);
    r.cell.seed = std::stoull(row[5]);
    r.coverage = number(row[6]);
    r.mean_width = number(row[7]);
    r.median_width = number(row[8]);
    r.rel_loo_error = number(row[9]);
    r.n_unbounded = row[10].empty() ? 0 : std::stoull(row[10]);
    r.failure = row[11];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const CoverageReport& report, ReportFormat format,
                                               const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::Csv) {
    written.push_back(directory / "runs.csv");
    write_text_file(written.back(), runs_csv(report));
    written.push_back(directory / "aggregate.csv");
    write_text_file(written.back(), aggregate_csv(report));
  } else {
    written.push_back(directory / "report.json");
    write_text_file(written.back(), report_json(report).dump(1) + "\n");
  }
  return written;
}

}  // namespace cpce
