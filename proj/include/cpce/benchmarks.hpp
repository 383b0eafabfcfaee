#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpce/basis.hpp"
#include "cpce/pce.hpp"

namespace cpce {

enum class BenchmarkId { Meromorphic, OtlCircuit, Piston, WingWeight };

inline constexpr BenchmarkId kAllBenchmarks[] = {BenchmarkId::Meromorphic, BenchmarkId::OtlCircuit,
                                                 BenchmarkId::Piston, BenchmarkId::WingWeight};

std::string_view to_string(BenchmarkId id);
std::optional<BenchmarkId> parse_benchmark(std::string_view name);

/// Named input parameter of a benchmark, for display.
struct Parameter {
  std::string symbol;
  std::string units;
  Range range;
};

/// Ground-truth function over a box of independent uniform inputs.
/// Benchmarks other than the four built-in ones may be constructed directly
/// (e.g. synthetic targets in tests); `name` then keys the seed streams.
struct Benchmark {
  std::string name;
  std::vector<Parameter> parameters;
  InputSpec input_spec;
  std::function<double(std::span<const double>)> function;
  /// Multivariate benchmarks size designs as C*K; univariate ones as C*(P+1)^2.
  bool quadratic_design_rule = false;

  std::size_t dim() const { return input_spec.dim(); }
  /// Checks the point against the box (DomainError) and evaluates.
  double evaluate(std::span<const double> x) const;
};

const Benchmark& benchmark(BenchmarkId id);

double evaluate(BenchmarkId id, std::span<const double> x);

double meromorphic(double x);
double otl_circuit(std::span<const double> x);
double piston(std::span<const double> x);
double wing_weight(std::span<const double> x);

/// Purpose of a random stream; train and test draws never share a stream.
enum class Stream : std::uint64_t { Train = 1, Test = 2 };

/// Seed of one grid cell's stream, hashed from every coordinate that
/// identifies the draw so that changing one grid axis leaves other cells intact.
std::uint64_t cell_seed(std::string_view benchmark_name, unsigned degree, unsigned oversampling,
                        std::uint64_t seed_index, Stream stream);

/// `count` i.i.d. uniform points in the box (xoshiro256** seeded with `seed`).
RowMatrix sample_inputs(const InputSpec& spec, std::size_t count, std::uint64_t seed);

Dataset sample_design(const Benchmark& bench, std::size_t count, std::uint64_t seed);
Dataset sample_design(BenchmarkId id, std::size_t count, std::uint64_t seed);

/// Experimental design size: C*(P+1)^2 for the univariate benchmark,
/// C*K with K the total-degree basis size otherwise.
std::size_t design_size(const Benchmark& bench, unsigned degree, unsigned oversampling);
std::size_t design_size(BenchmarkId id, unsigned degree, unsigned oversampling);

}  // namespace cpce
