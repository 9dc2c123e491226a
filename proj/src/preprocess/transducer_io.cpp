#include "aecd/preprocess/transducer.hpp"

#include <fstream>

namespace aecd::preprocess {

nlohmann::json to_json(const TransducerModel& model) {
  nlohmann::json j;
  j["ups"] = model.ups;
  j["floor_epsilon"] = model.floor_epsilon;
  auto& resp = j["response"] = nlohmann::json::array();
  for (const auto& w : model.response) resp.push_back({w.real(), w.imag()});
  return j;
}

TransducerModel transducer_from_json(const nlohmann::json& j) {
  TransducerModel m;
  try {
    m.ups = j.at("ups").get<double>();
    m.floor_epsilon = j.at("floor_epsilon").get<double>();
    for (const auto& pair : j.at("response")) {
      if (!pair.is_array() || pair.size() != 2) fail(ErrorCode::Format, "response entries must be [re, im]");
      m.response.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("transducer model: ") + e.what());
  }
  m.validate();
  return m;
}

TransducerModel load_transducer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  return transducer_from_json(j);
}

void save_transducer(const TransducerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << to_json(model).dump(1) << '\n';
}
}  // namespace aecd::preprocess
