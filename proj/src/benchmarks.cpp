#include "cpce/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cpce/rng.hpp"

namespace cpce {

std::string_view to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Meromorphic: return "meromorphic";
    case BenchmarkId::OtlCircuit: return "otl_circuit";
    case BenchmarkId::Piston: return "piston";
    case BenchmarkId::WingWeight: return "wing_weight";
  }
  throw std::logic_error("unknown benchmark id");
}

std::optional<BenchmarkId> parse_benchmark(std::string_view name) {
  for (BenchmarkId id : kAllBenchmarks) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

double meromorphic(double x) {
  constexpr double a = 1.0;
  constexpr double b = 0.5;
  return 1.0 / (a + b * x);
}

// x = (Rb1, Rb2, Rf, Rc1, Rc2, beta)
double otl_circuit(std::span<const double> x) {
  const double rb1 = x[0], rb2 = x[1], rf = x[2], rc1 = x[3], rc2 = x[4], beta = x[5];
  const double vb1 = 12.0 * rb2 / (rb1 + rb2);
  const double gain = beta * (rc2 + 9.0);
  const double denom = gain + rf;
  return (vb1 + 0.74) * gain / denom + 11.35 * rf / denom + 0.74 * rf * gain / (denom * rc1);
}

// x = (M, S, V0, k, P0, Ta, T0)
double piston(std::span<const double> x) {
  const double mass = x[0], area = x[1], v0 = x[2], k = x[3], p0 = x[4], ta = x[5], t0 = x[6];
  const double a = p0 * area + 19.62 * mass - k * v0 / area;
  const double discriminant = a * a + 4.0 * k * (p0 * v0 / t0) * ta;
  if (!(discriminant >= 0.0)) {
    throw std::logic_error("piston: negative square-root argument inside the input box");
  }
  const double volume = area / (2.0 * k) * (std::sqrt(discriminant) - a);
  return 2.0 * std::numbers::pi *
         std::sqrt(mass / (k + area * area * (p0 * v0 / t0) * (ta / (volume * volume))));
}

// x = (Sw, Wfw, A, sweep [deg], q, taper, t/c, Nz, Wdg, Wp)
double wing_weight(std::span<const double> x) {
  const double sw = x[0], wfw = x[1], aspect = x[2], q = x[4], taper = x[5], tc = x[6],
               nz = x[7], wdg = x[8], wp = x[9];
  const double cos_sweep = std::cos(x[3] * std::numbers::pi / 180.0);
  return 0.036 * std::pow(sw, 0.758) * std::pow(wfw, 0.0035) *
             std::pow(aspect / (cos_sweep * cos_sweep), 0.6) * std::pow(q, 0.006) *
             std::pow(taper, 0.04) * std::pow(100.0 * tc / cos_sweep, -0.3) *
             std::pow(nz * wdg, 0.49) +
         sw * wp;
}

double Benchmark::evaluate(std::span<const double> x) const {
  (void)to_reference(x, input_spec);
  return function(x);
}

namespace {

InputSpec spec_of(const std::vector<Parameter>& params) {
  std::vector<Range> ranges;
  ranges.reserve(params.size());
  for (const auto& p : params) ranges.push_back(p.range);
  return InputSpec(std::move(ranges));
}

Benchmark make_benchmark(std::string name, std::vector<Parameter> params,
                         std::function<double(std::span<const double>)> fn, bool quadratic) {
  InputSpec spec = spec_of(params);
  return Benchmark{std::move(name), std::move(params), std::move(spec), std::move(fn), quadratic};
}

}  // namespace

const Benchmark& benchmark(BenchmarkId id) {
  static const Benchmark mero = make_benchmark(
      "meromorphic", {{"x", "-", {-1.0, 1.0}}},
      [](std::span<const double> x) { return meromorphic(x[0]); }, true);
  static const Benchmark otl = make_benchmark("otl_circuit",
                                              {{"Rb1", "kOhm", {50.0, 150.0}},
                                               {"Rb2", "kOhm", {25.0, 70.0}},
                                               {"Rf", "kOhm", {0.5, 30.0}},
                                               {"Rc1", "kOhm", {1.2, 2.5}},
                                               {"Rc2", "kOhm", {0.25, 1.2}},
                                               {"beta", "A", {50.0, 300.0}}},
                                              otl_circuit, false);
  static const Benchmark pist = make_benchmark("piston",
                                               {{"M", "kg", {30.0, 60.0}},
                                                {"S", "m^2", {0.005, 0.02}},
                                                {"V0", "m^3", {0.002, 0.01}},
                                                {"k", "N/m", {1000.0, 5000.0}},
                                                {"P0", "N/m^2", {90000.0, 110000.0}},
                                                {"Ta", "K", {290.0, 296.0}},
                                                {"T0", "K", {340.0, 360.0}}},
                                               piston, false);
  static const Benchmark wing = make_benchmark("wing_weight",
                                               {{"Sw", "ft^2", {150.0, 200.0}},
                                                {"Wfw", "lb", {220.0, 300.0}},
                                                {"A", "-", {6.0, 10.0}},
                                                {"Lambda", "deg", {-10.0, 10.0}},
                                                {"q", "lb/ft^2", {16.0, 45.0}},
                                                {"lambda", "-", {0.5, 1.0}},
                                                {"tc", "-", {0.08, 0.18}},
                                                {"Nz", "-", {2.5, 6.0}},
                                                {"Wdg", "lb", {1700.0, 2500.0}},
                                                {"Wp", "lb/ft^2", {0.025, 0.08}}},
                                               wing_weight, false);
  switch (id) {
    case BenchmarkId::Meromorphic: return mero;
    case BenchmarkId::OtlCircuit: return otl;
    case BenchmarkId::Piston: return pist;
    case BenchmarkId::WingWeight: return wing;
  }
  throw std::logic_error("unknown benchmark id");
}

double evaluate(BenchmarkId id, std::span<const double> x) { return benchmark(id).evaluate(x); }

std::uint64_t cell_seed(std::string_view benchmark_name, unsigned degree, unsigned oversampling,
                        std::uint64_t seed_index, Stream stream) {
  return mix_seed({fnv1a(benchmark_name), degree, oversampling, seed_index,
                   static_cast<std::uint64_t>(stream)});
}

RowMatrix sample_inputs(const InputSpec& spec, std::size_t count, std::uint64_t seed) {
  Xoshiro256StarStar rng(seed);
  const std::size_t dim = spec.dim();
  RowMatrix points(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t n = 0; n < dim; ++n) {
      const auto& r = spec[n];
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) =
          r.lower + (r.upper - r.lower) * rng.uniform01();
    }
  }
  return points;
}

Dataset sample_design(const Benchmark& bench, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample_design: count must be >= 1");
  Dataset data{sample_inputs(bench.input_spec, count, seed),
               Eigen::VectorXd(static_cast<Eigen::Index>(count))};
  for (std::size_t m = 0; m < count; ++m) {
    data.outputs[static_cast<Eigen::Index>(m)] = bench.function(data.point(m));
  }
  return data;
}

Dataset sample_design(BenchmarkId id, std::size_t count, std::uint64_t seed) {
  return sample_design(benchmark(id), count, seed);
}

std::size_t design_size(const Benchmark& bench, unsigned degree, unsigned oversampling) {
  if (oversampling == 0) throw std::invalid_argument("oversampling coefficient must be >= 1");
  if (bench.quadratic_design_rule) {
    const std::size_t terms = degree + 1u;
    return oversampling * terms * terms;
  }
  return oversampling * total_degree_cardinality(bench.dim(), degree);
}

std::size_t design_size(BenchmarkId id, unsigned degree, unsigned oversampling) {
  return design_size(benchmark(id), degree, oversampling);
}

}  // namespace cpce
