#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "wildfire/core/error.hpp"

namespace wildfire::ml {

// US fire size classes. The printed table leaves gaps (0.25 / 0.26, 9.9 / 10);
// these bounds close them: A is [0, 0.25], B is (0.25, 10), and every later
// class is [lower, upper).
struct SizeClass {
  char letter;
  double lower;
  double upper;
};

inline constexpr std::array<SizeClass, 7> kSizeClasses = {{
    {'A', 0.0, 0.25},
    {'B', 0.25, 10.0},
    {'C', 10.0, 100.0},
    {'D', 100.0, 300.0},
    {'E', 300.0, 1000.0},
    {'F', 1000.0, 5000.0},
    {'G', 5000.0, std::numeric_limits<double>::infinity()},
}};

inline const SizeClass& size_class_of(double acres) {
  if (!(acres >= 0.0)) throw NegativeSize("fire size must be a non-negative number, got " + std::to_string(acres));
  if (acres <= 0.25) return kSizeClasses[0];
  for (std::size_t i = 1; i < kSizeClasses.size(); ++i)
    if (acres < kSizeClasses[i].upper) return kSizeClasses[i];
  return kSizeClasses.back();
}

inline char classify_fire_size(double acres) { return size_class_of(acres).letter; }

}  // namespace wildfire::ml
