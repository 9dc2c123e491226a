#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

#include "aecd/binary_io.hpp"
#include "aecd/descriptors/gamma.hpp"

namespace aecd::descriptors {

inline constexpr std::uint32_t kFeatureFileVersion = 1;
inline constexpr std::uint8_t kUnlabeled = 255;

/// GAMQ layout (little-endian): "GAMQ", version u32, event_count u32,
/// rows u32, n_ed u32, lambda u8, then per event a label u8 followed by
/// rows*n_ed float64 row-major. Event ids are not stored; records keep the
/// order they were written in.
void write_features(std::ostream& out, std::span<const DescriptorMatrix> data, Lambda lambda,
                    std::size_t n_ed);

void write_features(const std::filesystem::path& path, std::span<const DescriptorMatrix> data, Lambda lambda,
                    std::size_t n_ed);

struct FeatureFile {
  Lambda lambda = Lambda::L5;
  std::size_t rows = 0;
  std::size_t n_ed = 0;
  std::vector<DescriptorMatrix> records;
};

FeatureFile read_features(std::istream& in);

FeatureFile read_features(const std::filesystem::path& path);

}  // namespace aecd::descriptors
