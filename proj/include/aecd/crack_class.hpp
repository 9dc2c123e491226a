#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "aecd/error.hpp"

namespace aecd {

/// Crack mode of an acoustic-emission event.
enum class CrackClass : std::uint8_t { Tensile = 0, Shear = 1, MixedMode = 2 };

inline constexpr std::size_t kClassCount = 3;

inline std::string_view to_string(CrackClass c) {
  switch (c) {
    case CrackClass::Tensile: return "tensile";
    case CrackClass::Shear: return "shear";
    case CrackClass::MixedMode: return "mixed";
  }
  return "?";
}

inline std::size_t class_index(CrackClass c) { return static_cast<std::size_t>(c); }

inline CrackClass class_from_index(std::size_t i) {
  if (i >= kClassCount) fail(ErrorCode::InvalidArgument, "class index out of range: " + std::to_string(i));
  return static_cast<CrackClass>(i);
}

}  // namespace aecd
