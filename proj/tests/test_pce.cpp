#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cpce/benchmarks.hpp"
#include "cpce/errors.hpp"
#include "cpce/pce.hpp"
#include "oracles.hpp"

using namespace cpce;
using cpce::testing::close_rel;

namespace {

const InputSpec kReference({{-1.0, 1.0}});

Dataset univariate(const std::vector<double>& xs, double (*f)(double)) {
  Dataset d{RowMatrix(static_cast<Eigen::Index>(xs.size()), 1),
            Eigen::VectorXd(static_cast<Eigen::Index>(xs.size()))};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d.inputs(static_cast<Eigen::Index>(i), 0) = xs[i];
    d.outputs[static_cast<Eigen::Index>(i)] = f(xs[i]);
  }
  return d;
}

std::vector<double> grid(int count) {
  std::vector<double> xs(count);
  for (int i = 0; i < count; ++i) xs[i] = -1.0 + 2.0 * (i + 0.5) / count;
  return xs;
}

RowMatrix random_points(const InputSpec& spec, int count, std::uint64_t seed) {
  return sample_inputs(spec, static_cast<std::size_t>(count), seed);
}

void check_against_oracle(const Benchmark& bench, unsigned P, unsigned C, std::uint64_t seed) {
  const auto basis = build_total_degree_set(bench.dim(), P);
  const auto data = sample_design(bench, design_size(bench, P, C), seed);
  const auto model = fit(data, basis, bench.input_spec);
  const RowMatrix test = random_points(bench.input_spec, 10, seed + 1000);
  const auto oracle = brute_force_loo(data, basis, bench.input_spec, test);

  for (Eigen::Index m = 0; m < oracle.residuals.size(); ++m) {
    CHECK(close_rel(model.loo_residuals()[m], oracle.residuals[m], 1e-8, 1e-10));
  }
  for (Eigen::Index j = 0; j < test.rows(); ++j) {
    const Eigen::VectorXd loo = model.loo_predict({test.row(j).data(), bench.dim()});
    for (Eigen::Index m = 0; m < loo.size(); ++m) {
      CHECK(close_rel(loo[m], oracle.predictions(j, m), 1e-8, 1e-10));
    }
  }
}

}  // namespace

TEST_CASE("constant target is recovered exactly") {
  const auto data = univariate(grid(12), [](double) { return 1.0; });
  const auto model = fit(data, build_total_degree_set(1, 3), kReference);
  CHECK(model.coefficients()[0] == doctest::Approx(1.0).epsilon(1e-14));
  for (Eigen::Index k = 1; k < 4; ++k) CHECK(std::abs(model.coefficients()[k]) < 1e-14);
  CHECK(model.loo_residuals().cwiseAbs().maxCoeff() < 1e-13);
  CHECK(pce_variance(model) < 1e-26);
  // Exactly zero non-constant coefficients leave nothing to normalize by.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
  c[0] = 1.0;
  const PceModel flat(model.basis(), model.input_spec(), c, model.hat_diag(),
                      Eigen::VectorXd::Zero(12), RowMatrix::Zero(12, 4));
  CHECK(pce_variance(flat) == 0.0);
  CHECK_THROWS_AS(relative_loo_error(flat), ZeroVarianceError);
  const std::vector<double> x{0.3};
  CHECK(model.predict(x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("identity target has coefficient 1/sqrt(3) on psi_1") {
  const auto data = univariate(grid(10), [](double x) { return x; });
  const auto model = fit(data, build_total_degree_set(1, 2), kReference);
  CHECK(model.coefficients()[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-13));
  CHECK(model.loo_residuals().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(pce_variance(model) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(relative_loo_error(model) < 1e-20);
}

TEST_CASE("meromorphic P=3 C=10 has small relative LOO error") {
  const auto& bench = benchmark(BenchmarkId::Meromorphic);
  const std::size_t M = design_size(bench, 3, 10);
  REQUIRE(M == 160);
  const auto data = sample_design(bench, M, 1);
  const auto model = fit(data, build_total_degree_set(1, 3), bench.input_spec);
  const double err = relative_loo_error(model);
  CHECK(err < 1e-2);

  // Direct evaluation of the definition with the oracle's residuals.
  const auto oracle = brute_force_loo(data, model.basis(), bench.input_spec);
  const double direct = oracle.residuals.squaredNorm() / M / pce_variance(model);
  CHECK(err == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("fit error paths") {
  SUBCASE("fewer samples than terms") {
    const auto data = univariate({-0.5, 0.0, 0.5}, [](double x) { return x; });
    try {
      (void)fit(data, build_total_degree_set(1, 3), kReference);
      FAIL("expected UnderdeterminedError");
    } catch (const UnderdeterminedError& e) {
      CHECK(std::string(e.what()).find("underdetermined") != std::string::npos);
    }
  }
  SUBCASE("interpolation regime trips the leverage guard") {
    const auto data = univariate({-0.9, -0.3, 0.4, 0.8}, [](double x) { return std::exp(x); });
    CHECK_THROWS_AS(fit(data, build_total_degree_set(1, 3), kReference), LeverageError);
  }
  SUBCASE("repeated inputs make the design rank deficient") {
    const auto data = univariate({-0.5, -0.5, 0.5, 0.5, 0.5, -0.5}, [](double x) { return x; });
    CHECK_THROWS_AS(fit(data, build_total_degree_set(1, 3), kReference), RankDeficientError);
  }
  SUBCASE("non-finite output") {
    auto data = univariate(grid(8), [](double x) { return x; });
    data.outputs[2] = std::nan("");
    CHECK_THROWS_AS(fit(data, build_total_degree_set(1, 1), kReference), std::invalid_argument);
  }
  SUBCASE("out of box input") {
    auto data = univariate(grid(8), [](double x) { return x; });
    data.inputs(0, 0) = 1.5;
    CHECK_THROWS_AS(fit(data, build_total_degree_set(1, 1), kReference), DomainError);
  }
}

TEST_CASE("predict on hand-assembled models") {
  const auto basis = build_total_degree_set(2, 2);
  const InputSpec spec({{0.0, 2.0}, {-3.0, 1.0}});
  const std::vector<double> x{0.4, -0.2};
  const Eigen::VectorXd row = eval_basis_at(x, spec, basis);
  for (Eigen::Index k = 0; k < 6; ++k) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
    c[k] = 1.0;
    const PceModel model(basis, spec, c, Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(6),
                         RowMatrix::Zero(6, 6));
    CHECK(model.predict(x) == row[k]);
  }
}

TEST_CASE("OTL prediction at the midpoint equals the basis-row dot product") {
  const auto& bench = benchmark(BenchmarkId::OtlCircuit);
  const auto basis = build_total_degree_set(6, 2);
  const auto model = fit(sample_design(bench, design_size(bench, 2, 3), 11), basis, bench.input_spec);
  const auto mid = bench.input_spec.midpoint();
  // Hand-rolled dot product with every coordinate of the midpoint at xi = 0.
  std::vector<double> psi(3);
  orthonormal_legendre(0.0, 2, psi);
  double expected = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double term = 1.0;
    for (unsigned d : basis[k].degrees) term *= psi[d];
    expected += term * model.coefficients()[static_cast<Eigen::Index>(k)];
  }
  CHECK(std::abs(model.predict(mid) - expected) <= 1e-13 * std::abs(expected));
}

TEST_CASE("closed-form LOO matches brute-force refits") {
  SUBCASE("OTL P=2 C=3") { check_against_oracle(benchmark(BenchmarkId::OtlCircuit), 2, 3, 5); }
  SUBCASE("every benchmark, smallest degrees, several seeds") {
    const std::pair<BenchmarkId, unsigned> cases[] = {{BenchmarkId::Meromorphic, 2},
                                                      {BenchmarkId::Meromorphic, 3},
                                                      {BenchmarkId::OtlCircuit, 1},
                                                      {BenchmarkId::Piston, 1},
                                                      {BenchmarkId::WingWeight, 1}};
    for (const auto& [id, P] : cases) {
      for (unsigned C : {2u, 3u}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
          check_against_oracle(benchmark(id), P, C, seed);
        }
      }
    }
  }
}

TEST_CASE("brute-force oracle on a constant target") {
  const auto data = univariate(grid(9), [](double) { return 2.5; });
  const auto oracle = brute_force_loo(data, build_total_degree_set(1, 2), kReference);
  CHECK(oracle.residuals.cwiseAbs().maxCoeff() < 1e-13);
  CHECK(oracle.predictions.rows() == 0);
  const auto tiny = univariate({0.1, 0.2, 0.3}, [](double x) { return x; });
  CHECK_THROWS_AS(brute_force_loo(tiny, build_total_degree_set(1, 2), kReference),
                  UnderdeterminedError);
}

TEST_CASE("LOO prediction at a training point") {
  const auto& bench = benchmark(BenchmarkId::Piston);
  const auto data = sample_design(bench, design_size(bench, 2, 3), 4);
  const auto model = fit(data, build_total_degree_set(7, 2), bench.input_spec);
  for (std::size_t m : {0ul, 17ul, data.size() - 1}) {
    const auto loo = model.loo_predict(data.point(m));
    const auto i = static_cast<Eigen::Index>(m);
    const double expected = data.outputs[i] - model.loo_residuals()[i];
    CHECK(loo[i] == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("exact-polynomial target collapses LOO predictions") {
  const auto data = univariate(grid(15), [](double x) { return 2.0 - x + 3.0 * x * x; });
  const auto model = fit(data, build_total_degree_set(1, 3), kReference);
  CHECK(model.loo_residuals().cwiseAbs().maxCoeff() < 1e-12);
  const std::vector<double> x{0.37};
  const auto loo = model.loo_predict(x);
  for (Eigen::Index m = 0; m < loo.size(); ++m) {
    CHECK(loo[m] == doctest::Approx(model.predict(x)).epsilon(1e-13));
  }
}

TEST_CASE("hat-matrix identities and residual relation") {
  for (BenchmarkId id : kAllBenchmarks) {
    const auto& bench = benchmark(id);
    const unsigned P = bench.dim() == 1 ? 3 : 2;
    const auto data = sample_design(bench, design_size(bench, P, 2), 9);
    const auto model = fit(data, build_total_degree_set(bench.dim(), P), bench.input_spec);
    const auto& h = model.hat_diag();
    CHECK(h.minCoeff() >= 0.0);
    CHECK(h.maxCoeff() <= 1.0);
    CHECK(std::abs(h.sum() - static_cast<double>(model.num_terms())) <= 1e-8);
    for (std::size_t m = 0; m < data.size(); ++m) {
      const auto i = static_cast<Eigen::Index>(m);
      const double training_residual = data.outputs[i] - model.predict(data.point(m));
      const double recovered = model.loo_residuals()[i] * (1.0 - h[i]);
      CHECK(close_rel(recovered, training_residual, 1e-10, 1e-14));
    }
  }
}

TEST_CASE("affine maps of the outputs map the coefficients") {
  const auto& bench = benchmark(BenchmarkId::WingWeight);
  const auto basis = build_total_degree_set(10, 1);
  const auto data = sample_design(bench, design_size(bench, 1, 5), 2);
  Dataset shifted = data;
  const double a = -2.5, b = 40.0;
  shifted.outputs = (a * data.outputs).array() + b;
  const auto base = fit(data, basis, bench.input_spec);
  const auto mapped = fit(shifted, basis, bench.input_spec);
  Eigen::VectorXd expected = a * base.coefficients();
  expected[0] += b;
  const double scale = expected.cwiseAbs().maxCoeff();
  CHECK((mapped.coefficients() - expected).cwiseAbs().maxCoeff() <= 1e-10 * scale);
}

TEST_CASE("permuting samples permutes LOO residuals") {
  const auto& bench = benchmark(BenchmarkId::OtlCircuit);
  const auto basis = build_total_degree_set(6, 2);
  const auto data = sample_design(bench, design_size(bench, 2, 3), 21);
  std::vector<Eigen::Index> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  Dataset shuffled{RowMatrix(data.inputs.rows(), data.inputs.cols()), Eigen::VectorXd(data.outputs.size())};
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.inputs.row(static_cast<Eigen::Index>(i)) = data.inputs.row(perm[i]);
    shuffled.outputs[static_cast<Eigen::Index>(i)] = data.outputs[perm[i]];
  }
  const auto a = fit(data, basis, bench.input_spec);
  const auto b = fit(shuffled, basis, bench.input_spec);
  const double cscale = a.coefficients().cwiseAbs().maxCoeff();
  CHECK((a.coefficients() - b.coefficients()).cwiseAbs().maxCoeff() <= 1e-12 * cscale);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    CHECK(close_rel(b.loo_residuals()[static_cast<Eigen::Index>(i)], a.loo_residuals()[perm[i]],
                    1e-9, 1e-12));
  }
}

TEST_CASE("coefficient variance against Monte Carlo for OTL") {
  const auto& bench = benchmark(BenchmarkId::OtlCircuit);
  const auto model = fit(sample_design(bench, design_size(bench, 3, 10), 3),
                         build_total_degree_set(6, 3), bench.input_spec);
  // Monte Carlo with an unrelated generator.
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> x(6);
  for (int i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < 6; ++d) {
      const auto& r = bench.input_spec[d];
      x[d] = r.lower + u(gen) * (r.upper - r.lower);
    }
    const double y = otl_circuit(x);
    sum += y;
    sum_sq += y * y;
  }
  const double mean = sum / n;
  const double mc_var = (sum_sq - n * mean * mean) / (n - 1);
  CHECK(std::abs(pce_variance(model) - mc_var) <= 0.05 * mc_var);
}

TEST_CASE("relative LOO error is invariant to output scaling") {
  const auto& bench = benchmark(BenchmarkId::Piston);
  const auto basis = build_total_degree_set(7, 2);
  const auto data = sample_design(bench, design_size(bench, 2, 3), 8);
  Dataset scaled = data;
  scaled.outputs *= 10.0;
  const double a = relative_loo_error(fit(data, basis, bench.input_spec));
  const double b = relative_loo_error(fit(scaled, basis, bench.input_spec));
  CHECK(b == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("empirical variance estimator") {
  const auto data = univariate(grid(20), [](double x) { return x; });
  const auto model = fit(data, build_total_degree_set(1, 1), kReference);
  const double mean = data.outputs.mean();
  const double expected = (data.outputs.array() - mean).square().sum() / 19.0;
  CHECK(output_variance(model, VarianceEstimator::Empirical) == doctest::Approx(expected));
  const PceModel detached(model.basis(), model.input_spec(), model.coefficients(), model.hat_diag(),
                          model.loo_residuals(), model.loo_corrections());
  CHECK_THROWS_AS(output_variance(detached, VarianceEstimator::Empirical), std::invalid_argument);
}
