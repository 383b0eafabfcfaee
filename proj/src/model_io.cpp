#include "cpce/model_io.hpp"

#include <stdexcept>
#include <vector>

#include "cpce/csv.hpp"

namespace cpce {

namespace {

nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const nlohmann::json& doc, const char* key) {
  const auto values = doc.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::ordered_json model_to_json(const PceModel& model) {
  nlohmann::ordered_json doc;

  auto ranges = nlohmann::ordered_json::array();
  for (const auto& r : model.input_spec().ranges()) ranges.push_back({r.lower, r.upper});
  doc["input_spec"] = std::move(ranges);

  const auto& basis = model.basis();
  auto indices = nlohmann::ordered_json::array();
  for (const auto& alpha : basis) indices.push_back(alpha.degrees);
  doc["multi_index_set"] = {{"input_dim", basis.input_dim()},
                            {"max_degree", basis.max_degree()},
                            {"indices", std::move(indices)}};

  doc["coefficients"] = vector_json(model.coefficients());
  doc["hat_diag"] = vector_json(model.hat_diag());
  doc["loo_residuals"] = vector_json(model.loo_residuals());

  const auto& G = model.loo_corrections();
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index m = 0; m < G.rows(); ++m) {
    rows.push_back(std::vector<double>(G.row(m).data(), G.row(m).data() + G.cols()));
  }
  doc["loo_corrections"] = std::move(rows);
  return doc;
}

PceModel model_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Range> ranges;
    for (const auto& pair : doc.at("input_spec")) {
      if (pair.size() != 2) throw std::invalid_argument("input_spec entries must be [lower, upper]");
      ranges.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    InputSpec spec(std::move(ranges));

    const auto& set = doc.at("multi_index_set");
    std::vector<MultiIndex> indices;
    for (const auto& alpha : set.at("indices")) {
      indices.push_back(MultiIndex{alpha.get<std::vector<unsigned>>()});
    }
    MultiIndexSet basis(set.at("input_dim").get<std::size_t>(), set.at("max_degree").get<unsigned>(),
                        std::move(indices));

    const auto& rows = doc.at("loo_corrections");
    const auto M = static_cast<Eigen::Index>(rows.size());
    const auto K = static_cast<Eigen::Index>(basis.size());
    RowMatrix G(M, K);
    for (Eigen::Index m = 0; m < M; ++m) {
      const auto row = rows.at(static_cast<std::size_t>(m)).get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != K) {
        throw std::invalid_argument("loo_corrections row length differs from basis size");
      }
      G.row(m) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), K);
    }

    return PceModel(std::move(basis), std::move(spec), vector_from(doc, "coefficients"),
                    vector_from(doc, "hat_diag"), vector_from(doc, "loo_residuals"), std::move(G));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model json: ") + e.what());
  }
}

void save_model(const PceModel& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model).dump(1) + "\n");
}

PceModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("model json: ") + e.what());
  }
  return model_from_json(doc);
}

}  // namespace cpce
