#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mts/geometry.hpp"

namespace mts {

using StationId = int;
using ZoneId = int;

struct NetworkConfig {
  double region_size_km = 20.0;
  int zone_count = 16;
  double station_spacing_km = 2.0;
  double station_merge_km = 0.1;
  /// Half-widths of the two square ring lines centred on the region centre.
  double inner_ring_half_width_km = 5.0;
  double outer_ring_half_width_km = 8.0;
  double transit_speed_kmh = 60.0;
  double boarding_wait_min = 5.0;
  double transit_fare = 2.75;
};

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct Zone {
  ZoneId id = 0;
  Point centroid;
  Rect bounds;
};

struct Station {
  StationId id = 0;
  Point location;
  std::vector<int> lines;  // indices into TransitNetwork::lines
};

struct Line {
  std::string name;
  bool closed = false;
  std::vector<Point> polyline;  // geometry vertices; closed lines repeat no vertex
  std::vector<StationId> stations;  // in travel order
  std::vector<double> arc_km;  // arc position of each station along the polyline
  double length_km = 0.0;
};

struct TransitLeg {
  int line = 0;
  StationId from = 0;
  StationId to = 0;
  double distance_km = 0.0;
};

struct TransitItinerary {
  StationId entry = 0;
  StationId exit = 0;
  double wait_time = 0.0;
  double in_vehicle_time = 0.0;
  int n_boardings = 0;
  std::vector<TransitLeg> legs;

  double total_time() const { return wait_time + in_vehicle_time; }
};

/// Zones, depots and the transit network. Immutable once built.
class Network {
 public:
  static Network build(const NetworkConfig& config);

  const NetworkConfig& config() const { return config_; }
  const std::vector<Zone>& zones() const { return zones_; }
  const std::vector<Point>& depots() const { return depots_; }
  const std::vector<Station>& stations() const { return stations_; }
  const std::vector<Line>& lines() const { return lines_; }

  /// The k stations closest to p, ascending by distance, ties by id.
  /// Returns every station when k exceeds the station count.
  std::vector<StationId> nearest_stations(const Point& p, std::size_t k) const;

  /// Fastest frequency-based itinerary; nullopt when the stations are not
  /// connected. entry == exit yields the empty itinerary (zero boardings).
  std::optional<TransitItinerary> transit_route(StationId entry,
                                                StationId exit) const;

  ZoneId zone_of(const Point& p) const;
  bool contains(const Point& p) const;

  void dump(std::ostream& out) const;

 private:
  NetworkConfig config_;
  int grid_dim_ = 0;
  std::vector<Zone> zones_;
  std::vector<Point> depots_;
  std::vector<Station> stations_;
  std::vector<Line> lines_;
  // All-pairs itineraries, row-major [entry * n + exit].
  std::vector<std::optional<TransitItinerary>> routes_;

  void compute_routes();
  std::optional<TransitItinerary> shortest_itinerary(StationId entry,
                                                     StationId exit) const;
};

}  // namespace mts
