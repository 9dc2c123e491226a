#include "aecd/descriptors/feature_file.hpp"

#include <fstream>

namespace aecd::descriptors {

void write_features(std::ostream& out, std::span<const DescriptorMatrix> data, Lambda lambda,
                    std::size_t n_ed) {
  const auto rows = rows_for(lambda);
  io::write_magic(out, "GAMQ");
  io::write_le<std::uint32_t>(out, kFeatureFileVersion);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(data.size()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rows.size()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(n_ed));
  io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(lambda));
  for (const auto& m : data) {
    if (m.rows != rows || m.n_ed != n_ed) fail(ErrorCode::ConfigMismatch, "record shape differs from header");
    io::write_le<std::uint8_t>(out, m.label ? static_cast<std::uint8_t>(*m.label) : kUnlabeled);
    for (double v : m.values) io::write_le<double>(out, v);
  }
}

void write_features(const std::filesystem::path& path, std::span<const DescriptorMatrix> data, Lambda lambda,
                    std::size_t n_ed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  write_features(out, data, lambda, n_ed);
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

FeatureFile read_features(std::istream& in) {
  io::expect_magic(in, "GAMQ");
  const auto version = io::read_le<std::uint32_t>(in);
  if (version != kFeatureFileVersion) fail(ErrorCode::Format, "unsupported GAMQ version " + std::to_string(version));
  FeatureFile f;
  const auto count = io::read_le<std::uint32_t>(in);
  f.rows = io::read_le<std::uint32_t>(in);
  f.n_ed = io::read_le<std::uint32_t>(in);
  f.lambda = lambda_from_int(io::read_le<std::uint8_t>(in));
  const auto row_types = rows_for(f.lambda);
  if (row_types.size() != f.rows) fail(ErrorCode::Format, "row count disagrees with lambda");
  f.records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    DescriptorMatrix m;
    m.event_id = i;
    m.lambda = f.lambda;
    m.rows = row_types;
    m.n_ed = f.n_ed;
    const auto label = io::read_le<std::uint8_t>(in);
    if (label != kUnlabeled) m.label = class_from_index(label);
    m.values.resize(f.rows * f.n_ed);
    for (double& v : m.values) v = io::read_le<double>(in);
    f.records.push_back(std::move(m));
  }
  return f;
}

FeatureFile read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return read_features(in);
}
}  // namespace aecd::descriptors
