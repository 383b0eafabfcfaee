// Command-line front end: fit surrogates, query conformal intervals, run
// coverage experiments and list the built-in benchmarks.
//
// Exit codes: 0 ok, 2 usage/validation, 3 numerical/fit failure,
// 4 every experiment cell failed.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpce/benchmarks.hpp"
#include "cpce/conformal.hpp"
#include "cpce/csv.hpp"
#include "cpce/errors.hpp"
#include "cpce/harness.hpp"
#include "cpce/model_io.hpp"
#include "cpce/pce.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAllFailed = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int fail(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return code;
}

cpce::InputSpec parse_ranges(const std::string& text) {
  std::vector<cpce::Range> ranges;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("--ranges expects lo:hi,lo:hi,...");
    ranges.push_back({cpce::parse_double(item.substr(0, colon)),
                      cpce::parse_double(item.substr(colon + 1))});
  }
  return cpce::InputSpec(std::move(ranges));
}

const cpce::Benchmark& lookup_benchmark(const std::string& name) {
  const auto id = cpce::parse_benchmark(name);
  if (!id) throw UsageError("unknown benchmark '" + name + "'");
  return cpce::benchmark(*id);
}

struct FitArgs {
  std::string data;
  std::string benchmark;
  std::string ranges;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  unsigned degree = 0;
  std::string out;
};

int cmd_fit(const FitArgs& args, const CLI::App& sub) {
  const bool from_file = sub.count("--data") > 0;
  const bool sampled = sub.count("--m") > 0 || sub.count("--seed") > 0;
  if (from_file == sampled) {
    throw UsageError("give exactly one data source: --data FILE or --benchmark ID --m M --seed S");
  }

  std::optional<cpce::InputSpec> spec;
  cpce::Dataset data;
  if (from_file) {
    if (sub.count("--benchmark") > 0 && sub.count("--ranges") > 0) {
      throw UsageError("--benchmark and --ranges both define the input box; give one");
    }
    if (sub.count("--benchmark") > 0) {
      spec = lookup_benchmark(args.benchmark).input_spec;
    } else if (sub.count("--ranges") > 0) {
      spec = parse_ranges(args.ranges);
    } else {
      throw UsageError("--data needs --benchmark or --ranges to define the input box");
    }
    data = cpce::dataset_from_csv(cpce::read_text_file(args.data));
    if (data.dim() != spec->dim()) {
      throw UsageError("data has " + std::to_string(data.dim()) + " inputs, box has " +
                       std::to_string(spec->dim()));
    }
    for (std::size_t m = 0; m < data.size(); ++m) (void)cpce::to_reference(data.point(m), *spec);
  } else {
    if (sub.count("--benchmark") == 0 || sub.count("--m") == 0 || sub.count("--seed") == 0) {
      throw UsageError("sampling needs --benchmark, --m and --seed");
    }
    if (sub.count("--ranges") > 0) throw UsageError("--ranges only applies with --data");
    const auto& bench = lookup_benchmark(args.benchmark);
    if (args.m == 0) throw UsageError("--m must be >= 1");
    spec = bench.input_spec;
    data = cpce::sample_design(bench, args.m, args.seed);
  }

  const auto basis = cpce::build_total_degree_set(spec->dim(), args.degree);
  const cpce::PceModel model = cpce::fit(data, basis, *spec);
  cpce::save_model(model, args.out);

  double rel = std::numeric_limits<double>::quiet_NaN();
  try {
    rel = cpce::relative_loo_error(model);
  } catch (const cpce::ZeroVarianceError&) {
  }
  std::cout << "K=" << model.num_terms() << " M=" << model.num_samples()
            << " rel_loo_error=" << cpce::format_double(rel)
            << " condition_number=" << cpce::format_double(model.condition_number()) << "\n";
  return kExitOk;
}

struct IntervalArgs {
  std::string model;
  std::string points;
  std::string method = "jk+";
  std::string score = "abs";
  double alpha = 0.05;
  std::string out;
};

int cmd_interval(const IntervalArgs& args) {
  cpce::ConformalConfig cfg;
  try {
    cfg.method = cpce::parse_method(args.method);
    cfg.score = cpce::parse_score(args.score);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  cfg.significance = args.alpha;
  try {
    cpce::validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const cpce::PceModel model = cpce::load_model(args.model);
  const std::size_t dim = model.input_spec().dim();
  const cpce::RowMatrix points = cpce::points_from_csv(cpce::read_text_file(args.points), dim);
  const cpce::ConformalPredictor predictor(model, cfg);

  cpce::CsvTable table;
  for (std::size_t n = 0; n < dim; ++n) table.header.push_back("x" + std::to_string(n + 1));
  table.header.insert(table.header.end(), {"center", "lower", "upper"});
  std::size_t unbounded = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::span<const double> x(points.data() + i * points.cols(), dim);
    const auto iv = predictor.interval(x);
    if (!iv.bounded()) ++unbounded;
    std::vector<std::string> row;
    for (double v : x) row.push_back(cpce::format_double(v));
    row.push_back(cpce::format_double(iv.center));
    row.push_back(cpce::format_double(iv.lower));
    row.push_back(cpce::format_double(iv.upper));
    table.rows.push_back(std::move(row));
  }
  cpce::write_text_file(args.out, cpce::to_csv(table));
  if (unbounded > 0) {
    std::cerr << "warning: " << unbounded << " of " << points.rows()
              << " intervals are unbounded; " << model.num_samples()
              << " LOO scores are too few for alpha=" << cpce::format_double(args.alpha) << "\n";
  }
  return kExitOk;
}

struct ExperimentArgs {
  std::string config;
  bool quick = false;
  std::string out;
  std::string format = "both";
};

void print_summary(const cpce::CoverageReport& report) {
  std::printf("%-12s %3s %3s %-11s %-10s %6s %6s %10s %12s\n", "benchmark", "P", "C", "method",
              "score", "runs", "failed", "coverage", "width");
  for (const auto& a : report.aggregates) {
    std::printf("%-12s %3u %3u %-11s %-10s %6zu %6zu %10.4f %12.5g\n", a.benchmark.c_str(),
                a.degree, a.oversampling, std::string(cpce::to_string(a.method)).c_str(),
                std::string(cpce::to_string(a.score)).c_str(), a.n_runs, a.n_failed,
                a.coverage.mean, a.width.median);
  }
}

int cmd_experiment(const ExperimentArgs& args) {
  cpce::ExperimentConfig config;
  try {
    config = cpce::config_from_json(nlohmann::json::parse(cpce::read_text_file(args.config)));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (args.quick) cpce::apply_quick_profile(config);
  if (!args.out.empty()) config.output = args.out;
  if (config.output.empty()) throw UsageError("no output directory: set 'output' or pass --out");

  const auto report = cpce::run_grid(config);
  if (args.format == "csv" || args.format == "both") {
    cpce::emit_report(report, cpce::ReportFormat::Csv, config.output);
  }
  if (args.format == "json" || args.format == "both") {
    cpce::emit_report(report, cpce::ReportFormat::Json, config.output);
  }
  print_summary(report);

  const auto failures = report.failures();
  if (!failures.empty()) {
    std::cerr << failures.size() << " of " << report.records.size()
              << " runs failed; first: " << failures.front().failure << "\n";
  }
  if (!report.records.empty() && failures.size() == report.records.size()) {
    return fail(kExitAllFailed, "every experiment cell failed");
  }
  return kExitOk;
}

int cmd_benchmarks() {
  for (cpce::BenchmarkId id : cpce::kAllBenchmarks) {
    const auto& bench = cpce::benchmark(id);
    std::cout << bench.name << " (N=" << bench.dim() << ", design size "
              << (bench.quadratic_design_rule ? "C*(P+1)^2" : "C*K") << ")\n";
    for (const auto& p : bench.parameters) {
      std::printf("  %-8s %-8s [%s, %s]\n", p.symbol.c_str(), p.units.c_str(),
                  cpce::format_double(p.range.lower).c_str(),
                  cpce::format_double(p.range.upper).c_str());
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformalized polynomial chaos expansions"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a PCE surrogate and write it as JSON");
  fit->add_option("--data", fit_args.data, "Training CSV with header x1,...,xN,y");
  fit->add_option("--benchmark", fit_args.benchmark, "Benchmark id (sampling source or input box)");
  fit->add_option("--ranges", fit_args.ranges, "Input box for --data as lo:hi,lo:hi,...");
  fit->add_option("--m", fit_args.m, "Number of samples to draw");
  fit->add_option("--seed", fit_args.seed, "Sampling seed");
  fit->add_option("--degree", fit_args.degree, "Maximum total degree P")->required();
  fit->add_option("--out", fit_args.out, "Output model JSON")->required();

  IntervalArgs iv_args;
  auto* interval = app.add_subcommand("interval", "Conformal prediction intervals at points");
  interval->add_option("--model", iv_args.model, "Model JSON from `fit`")->required();
  interval->add_option("--points", iv_args.points, "CSV with header x1,...,xN")->required();
  interval->add_option("--method", iv_args.method, "jk | jk+")->capture_default_str();
  interval->add_option("--score", iv_args.score, "abs | norm")->capture_default_str();
  interval->add_option("--alpha", iv_args.alpha, "Significance level s")->capture_default_str();
  interval->add_option("--out", iv_args.out, "Output CSV")->required();

  ExperimentArgs ex_args;
  auto* experiment = app.add_subcommand("experiment", "Run a coverage experiment grid");
  experiment->add_option("--config", ex_args.config, "Experiment config JSON")->required();
  experiment->add_flag("--quick", ex_args.quick, "20 seeds x 2000 test points");
  experiment->add_option("--out", ex_args.out, "Report directory (overrides config output)");
  experiment->add_option("--format", ex_args.format, "csv | json | both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();

  app.add_subcommand("benchmarks", "List benchmark input parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitUsage, e.what());
  }

  try {
    if (*fit) return cmd_fit(fit_args, *fit);
    if (*interval) return cmd_interval(iv_args);
    if (*experiment) return cmd_experiment(ex_args);
    return cmd_benchmarks();
  } catch (const UsageError& e) {
    return fail(kExitUsage, e.what());
  } catch (const cpce::FitError& e) {
    return fail(kExitNumerical, e.what());
  } catch (const cpce::ZeroVarianceError& e) {
    return fail(kExitNumerical, e.what());
  } catch (const cpce::DomainError& e) {
    return fail(kExitUsage, std::string("domain: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitUsage, e.what());
  } catch (const std::exception& e) {
    return fail(kExitUsage, e.what());
  }
}
