#include "aecd/nn/model.hpp"

#include <fstream>

namespace aecd::nn {

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

void matrix_from_json(const nlohmann::json& j, Matrix& m, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
    fail(ErrorCode::Format, std::string("model: bad row count for ") + name);
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
      fail(ErrorCode::Format, std::string("model: bad column count for ") + name);
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
}

void vector_from_json(const nlohmann::json& j, Vector& v, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != v.size()) {
    fail(ErrorCode::Format, std::string("model: bad length for ") + name);
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
}

constexpr std::array<std::pair<Gate, const char*>, kGateCount> kGateNames{{
    {Gate::Input, "i"}, {Gate::Forget, "f"}, {Gate::Output, "o"}, {Gate::Cell, "c"}}};

nlohmann::json cell_to_json(const LSTMCellParams& p) {
  nlohmann::json j;
  for (auto [g, name] : kGateNames) {
    j[std::string("W") + name] = matrix_to_json(p.gate_W(g));
    j[std::string("V") + name] = matrix_to_json(p.gate_V(g));
    j[std::string("b") + name] = vector_to_json(p.gate_b(g));
  }
  return j;
}

void cell_from_json(const nlohmann::json& j, LSTMCellParams& p) {
  for (auto [g, name] : kGateNames) {
    Matrix W(p.hidden(), p.input()), V(p.hidden(), p.hidden());
    Vector b(p.hidden());
    matrix_from_json(j.at(std::string("W") + name), W, "W");
    matrix_from_json(j.at(std::string("V") + name), V, "V");
    vector_from_json(j.at(std::string("b") + name), b, "b");
    p.gate_W(g) = W;
    p.gate_V(g) = V;
    p.gate_b(g) = b;
  }
}

}  // namespace

nlohmann::json to_json(const ModelParams& m) {
  nlohmann::json j;
  j["version"] = kModelVersion;
  j["lambda"] = descriptors::to_int(m.lambda);
  j["n_ed"] = m.n_ed;
  j["d_lstm"] = m.d_lstm();
  j["n1"] = m.n1();
  j["n2"] = m.n2();
  j["readout"] = m.readout == Readout::Last ? "last" : "mean";
  auto layer = [](const BiLSTMLayer& l) {
    return nlohmann::json{{"fwd", cell_to_json(l.forward_cell)}, {"bwd", cell_to_json(l.backward_cell)}};
  };
  j["layers"]["layer1"] = layer(m.layer1);
  j["layers"]["layer2"] = layer(m.layer2);
  j["layers"]["dense"] = {{"W", matrix_to_json(m.dense_W)}, {"b", vector_to_json(m.dense_b)}};
  j["stats_ref"] = m.stats_ref;
  if (m.stats) j["stats"] = descriptors::stats_to_json(*m.stats);
  return j;
}

ModelParams model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kModelVersion) fail(ErrorCode::Format, "unsupported model version");
    const auto lambda = descriptors::lambda_from_int(j.at("lambda").get<int>());
    const auto readout = j.value("readout", std::string("last")) == "mean" ? Readout::Mean : Readout::Last;
    auto m = make_model(lambda, j.at("n_ed").get<std::size_t>(), j.at("n1").get<std::size_t>(),
                        j.at("n2").get<std::size_t>(), readout);
    if (j.at("d_lstm").get<std::size_t>() != m.d_lstm()) fail(ErrorCode::Format, "d_lstm != n1 + n2");
    const auto& layers = j.at("layers");
    for (auto [name, layer] : {std::pair{"layer1", &m.layer1}, std::pair{"layer2", &m.layer2}}) {
      cell_from_json(layers.at(name).at("fwd"), layer->forward_cell);
      cell_from_json(layers.at(name).at("bwd"), layer->backward_cell);
    }
    matrix_from_json(layers.at("dense").at("W"), m.dense_W, "dense W");
    vector_from_json(layers.at("dense").at("b"), m.dense_b, "dense b");
    m.stats_ref = j.value("stats_ref", std::string());
    if (j.contains("stats")) m.stats = descriptors::stats_from_json(j["stats"]);
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("model: ") + e.what());
  }
}

void save_model(const ModelParams& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << to_json(m).dump() << '\n';
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
}
}  // namespace aecd::nn
