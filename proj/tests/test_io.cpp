#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "cpce/benchmarks.hpp"
#include "cpce/conformal.hpp"
#include "cpce/csv.hpp"
#include "cpce/model_io.hpp"

using namespace cpce;

TEST_CASE("format_double is shortest and round-trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::isinf(parse_double("-inf")));
  CHECK(std::isnan(parse_double("nan")));

  std::mt19937_64 gen(1);
  for (int i = 0; i < 20000; ++i) {
    std::uint64_t bits = gen();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    const double back = parse_double(format_double(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
}

TEST_CASE("parse_double rejects junk") {
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_double("1.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double("abc"), std::invalid_argument);
  CHECK(parse_double(" 2.5 ") == 2.5);
  CHECK(parse_double("+3") == 3.0);
}

TEST_CASE("csv quoting and shape checks") {
  const CsvTable table{{"a", "b"}, {{"1", "x, \"y\""}, {"", "z"}}};
  const std::string text = to_csv(table);
  CHECK(text == "a,b\n1,\"x, \"\"y\"\"\"\n,z\n");
  const auto back = parse_csv(text);
  CHECK(back.header == table.header);
  CHECK(back.rows == table.rows);
  CHECK(parse_csv("a,b\r\n1,2\r\n").rows.size() == 1);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv("a\n\"open\n"), std::invalid_argument);
}

TEST_CASE("dataset csv round trip is bit exact") {
  const auto data = sample_design(BenchmarkId::Piston, 25, 5);
  const std::string text = dataset_to_csv(data);
  CHECK(text.rfind("x1,x2,x3,x4,x5,x6,x7,y\n", 0) == 0);
  const auto back = dataset_from_csv(text);
  CHECK(back.inputs == data.inputs);
  CHECK(back.outputs == data.outputs);
}

TEST_CASE("malformed dataset csv") {
  CHECK_THROWS_AS(dataset_from_csv("x1,z\n1,2\n"), std::invalid_argument);
  CHECK_THROWS_AS(dataset_from_csv("x1,y\n1,two\n"), std::invalid_argument);
  CHECK_THROWS_AS(dataset_from_csv("x2,y\n1,2\n"), std::invalid_argument);
  CHECK_THROWS_AS(dataset_from_csv("x1,y\n1,nan\n"), std::invalid_argument);
  CHECK_THROWS_AS(dataset_from_csv("x1,y\n"), std::invalid_argument);
}

TEST_CASE("points csv ignores trailing columns") {
  const auto pts = points_from_csv("x1,x2,y\n0.5,1,9\n-1,2,8\n", 2);
  CHECK(pts.rows() == 2);
  CHECK(pts(1, 0) == -1.0);
  CHECK_THROWS_AS(points_from_csv("x1\n0\n", 2), std::invalid_argument);
}

TEST_CASE("model json round trip preserves every prediction bit") {
  const auto& bench = benchmark(BenchmarkId::OtlCircuit);
  const auto model = fit(sample_design(bench, 84, 3), build_total_degree_set(6, 2), bench.input_spec);
  const auto path = std::filesystem::temp_directory_path() / "cpce_model_roundtrip.json";
  save_model(model, path);
  const auto loaded = load_model(path);
  std::filesystem::remove(path);

  CHECK(loaded.basis() == model.basis());
  CHECK(loaded.input_spec() == model.input_spec());
  CHECK(loaded.coefficients() == model.coefficients());
  CHECK(loaded.hat_diag() == model.hat_diag());
  CHECK(loaded.loo_residuals() == model.loo_residuals());
  CHECK(loaded.loo_corrections() == model.loo_corrections());
  CHECK_FALSE(loaded.training_snapshot().has_value());

  const auto x = bench.input_spec.midpoint();
  CHECK(loaded.predict(x) == model.predict(x));
  CHECK(loaded.loo_predict(x) == model.loo_predict(x));
  const ConformalConfig cfg{Method::JackknifePlus, Score::Normalized, 0.05};
  const auto a = ConformalPredictor(model, cfg).interval(x);
  const auto b = ConformalPredictor(loaded, cfg).interval(x);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);

  const auto doc = model_to_json(model);
  std::vector<std::string> keys;
  for (const auto& [key, value] : doc.items()) keys.push_back(key);
  CHECK(keys == std::vector<std::string>{"input_spec", "multi_index_set", "coefficients", "hat_diag",
                                         "loo_residuals", "loo_corrections"});
}

TEST_CASE("malformed model json") {
  auto doc = nlohmann::json(model_to_json(fit(sample_design(BenchmarkId::Meromorphic, 20, 1),
                                              build_total_degree_set(1, 2),
                                              benchmark(BenchmarkId::Meromorphic).input_spec)));
  auto missing = doc;
  missing.erase("hat_diag");
  CHECK_THROWS_AS(model_from_json(missing), std::invalid_argument);
  auto short_coeffs = doc;
  short_coeffs["coefficients"] = std::vector<double>{1.0};
  CHECK_THROWS_AS(model_from_json(short_coeffs), std::invalid_argument);
  auto bad_range = doc;
  bad_range["input_spec"] = {{1.0, -1.0}};
  CHECK_THROWS_AS(model_from_json(bad_range), std::invalid_argument);
  auto wrong_type = doc;
  wrong_type["loo_residuals"] = "none";
  CHECK_THROWS_AS(model_from_json(wrong_type), std::invalid_argument);
}
