#pragma once

#include <cmath>
#include <stdexcept>

namespace mts {

/// A location in the planar service region, kilometres.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance_km(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Straight-line travel time in minutes at `speed_kmh`.
inline double travel_time(const Point& a, const Point& b, double speed_kmh) {
  if (!(speed_kmh > 0.0)) {
    throw std::invalid_argument("travel_time: speed must be positive");
  }
  return 60.0 * distance_km(a, b) / speed_kmh;
}

/// Point reached after moving `fraction` of the way from a to b.
inline Point lerp(const Point& a, const Point& b, double fraction) {
  return {a.x + (b.x - a.x) * fraction, a.y + (b.y - a.y) * fraction};
}

}  // namespace mts
