#include "aecd/synth/dataset.hpp"

#include <cstdio>
#include <fstream>

namespace aecd::synth {

void write_waveform(const std::filesystem::path& path, const preprocess::RawEvent& ev) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  io::write_magic(out, "AEWF");
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ev.channels.size()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ev.channels.front().size()));
  for (const auto& ch : ev.channels) {
    for (double v : ch.samples()) io::write_le<double>(out, v);
  }
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

preprocess::RawEvent read_waveform(const std::filesystem::path& path, double sample_rate,
                                   std::int64_t event_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  io::expect_magic(in, "AEWF");
  const auto channels = io::read_le<std::uint32_t>(in);
  const auto length = io::read_le<std::uint32_t>(in);
  if (channels == 0 || length == 0) fail(ErrorCode::Format, path.string() + ": empty waveform");
  preprocess::RawEvent ev;
  ev.event_id = event_id;
  for (std::uint32_t k = 0; k < channels; ++k) {
    std::vector<double> v(length);
    for (double& x : v) x = io::read_le<double>(in);
    ev.channels.emplace_back(std::move(v), sample_rate);
  }
  return ev;
}

CrackClass class_from_string(std::string_view s) {
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (to_string(class_from_index(c)) == s) return class_from_index(c);
  }
  fail(ErrorCode::Format, "unknown class label '" + std::string(s) + "'");
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
  nlohmann::json j;
  j["sample_rate"] = m.sample_rate;
  j["events"] = nlohmann::json::array();
  for (const auto& e : m.events) {
    nlohmann::json ej{{"id", e.id}, {"file", e.file}};
    ej["label"] = e.label ? nlohmann::json(std::string(to_string(*e.label))) : nlohmann::json(nullptr);
    j["events"].push_back(ej);
  }
  for (const auto& [k, v] : m.extra.items()) j[k] = v;
  std::ofstream out(dir / "manifest.json");
  if (!out) fail(ErrorCode::Io, "cannot write manifest in " + dir.string());
  out << j.dump(1) << '\n';
}

Manifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) fail(ErrorCode::Io, "no manifest.json in " + dir.string());
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.sample_rate = j.at("sample_rate").get<double>();
    for (const auto& e : j.at("events")) {
      ManifestEntry me;
      me.id = e.at("id").get<std::int64_t>();
      me.file = e.at("file").get<std::string>();
      if (e.contains("label") && !e["label"].is_null()) {
        me.label = e["label"].is_number() ? class_from_index(e["label"].get<std::size_t>())
                                          : class_from_string(e["label"].get<std::string>());
      }
      m.events.push_back(std::move(me));
    }
    for (const auto& [k, v] : j.items()) {
      if (k != "sample_rate" && k != "events") m.extra[k] = v;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, "manifest: " + std::string(e.what()));
  }
  return m;
}

std::string waveform_file_name(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "event_%06lld.aewf", static_cast<long long>(id));
  return buf;
}

void save_dataset(const std::filesystem::path& dir, const LabeledDataset& ds, nlohmann::json extra) {
  std::filesystem::create_directories(dir);
  Manifest m;
  m.sample_rate = ds.sample_rate;
  if (extra.is_object()) m.extra = std::move(extra);
  for (const auto& e : ds.events) {
    const auto name = waveform_file_name(e.event.event_id);
    write_waveform(dir / name, e.event);
    m.events.push_back(ManifestEntry{e.event.event_id, e.label, name});
  }
  write_manifest(dir, m);
}
}  // namespace aecd::synth
