#include <gtest/gtest.h>

#include <sstream>

#include "mts/network.hpp"
#include "oracles.hpp"

using namespace mts;

namespace {
const Network& reference() {
  static const Network net = Network::build(NetworkConfig{});
  return net;
}
}  // namespace

TEST(Network, ReferenceZonesAndDepots) {
  const Network& net = reference();
  ASSERT_EQ(net.zones().size(), 16u);
  ASSERT_EQ(net.depots().size(), 16u);
  double area = 0.0;
  for (const Zone& z : net.zones()) {
    area += (z.bounds.x1 - z.bounds.x0) * (z.bounds.y1 - z.bounds.y0);
    EXPECT_DOUBLE_EQ(z.bounds.x1 - z.bounds.x0, 5.0);
  }
  EXPECT_DOUBLE_EQ(area, 400.0);
  // Centroids of 5 km tiles: 2.5, 7.5, 12.5, 17.5 on both axes.
  for (const Point& d : net.depots()) {
    EXPECT_DOUBLE_EQ(std::fmod(d.x - 2.5, 5.0), 0.0);
    EXPECT_DOUBLE_EQ(std::fmod(d.y - 2.5, 5.0), 0.0);
  }
  EXPECT_EQ(net.depots().front(), (Point{2.5, 2.5}));
  EXPECT_EQ(net.depots().back(), (Point{17.5, 17.5}));
}

TEST(Network, ZoneLookup) {
  const Network& net = reference();
  for (const Zone& z : net.zones()) EXPECT_EQ(net.zone_of(z.centroid), z.id);
  // Boundary points belong to exactly one zone and the region edge is inside.
  EXPECT_EQ(net.zone_of({0.0, 0.0}), net.zone_of({0.1, 0.1}));
  EXPECT_EQ(net.zone_of({20.0, 20.0}), net.zone_of({19.9, 19.9}));
  EXPECT_EQ(net.zone_of({5.0, 2.0}), net.zone_of({4.9, 2.0}));
  EXPECT_THROW(net.zone_of({-0.1, 3.0}), std::out_of_range);
  EXPECT_THROW(net.zone_of({3.0, 20.5}), std::out_of_range);
  EXPECT_FALSE(net.contains({21.0, 1.0}));
}

TEST(Network, BuildRejectsBadConfig) {
  NetworkConfig c;
  c.zone_count = 15;
  EXPECT_THROW(Network::build(c), std::invalid_argument);
  c = NetworkConfig{};
  c.station_spacing_km = 30.0;
  EXPECT_THROW(Network::build(c), std::invalid_argument);
  c = NetworkConfig{};
  c.outer_ring_half_width_km = 11.0;
  EXPECT_THROW(Network::build(c), std::invalid_argument);
}

TEST(Network, StationsDeduplicatedAndOnLines) {
  const Network& net = reference();
  EXPECT_EQ(net.lines().size(), 6u);
  const auto& st = net.stations();
  for (std::size_t a = 0; a < st.size(); ++a) {
    EXPECT_FALSE(st[a].lines.empty());
    for (std::size_t b = a + 1; b < st.size(); ++b) {
      EXPECT_GT(distance_km(st[a].location, st[b].location), NetworkConfig{}.station_merge_km);
    }
  }
  // The region centre is a crossing of four straight lines.
  const auto centre = net.nearest_stations({10.0, 10.0}, 1).front();
  EXPECT_LT(distance_km(st[static_cast<std::size_t>(centre)].location, {10.0, 10.0}), 1e-9);
  EXPECT_EQ(st[static_cast<std::size_t>(centre)].lines.size(), 4u);
}

TEST(Network, NearestStationsSortedByDistanceThenId) {
  const Network& net = reference();
  const Point p{3.3, 7.1};
  const auto ids = net.nearest_stations(p, 4);
  ASSERT_EQ(ids.size(), 4u);
  for (std::size_t i = 1; i < ids.size(); ++i) {
    const double a = distance_km(net.stations()[static_cast<std::size_t>(ids[i - 1])].location, p);
    const double b = distance_km(net.stations()[static_cast<std::size_t>(ids[i])].location, p);
    EXPECT_TRUE(a < b || (a == b && ids[i - 1] < ids[i]));
  }
  // Nothing outside the returned set is closer than the farthest returned.
  const double worst = distance_km(net.stations()[static_cast<std::size_t>(ids.back())].location, p);
  std::size_t closer = 0;
  for (const Station& s : net.stations()) closer += distance_km(s.location, p) < worst;
  EXPECT_LE(closer, 3u);
  EXPECT_EQ(net.nearest_stations(p, 10000).size(), net.stations().size());
}

TEST(Network, TransitRoutesMatchFloydWarshallOracle) {
  const Network& net = reference();
  const oracle::TransitOracle fw(net);
  const std::size_t n = net.stations().size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const auto itin = net.transit_route(static_cast<StationId>(a), static_cast<StationId>(b));
      const double expect = fw.time(a, b);
      if (expect == oracle::TransitOracle::kInf) {
        EXPECT_FALSE(itin.has_value());
        continue;
      }
      ASSERT_TRUE(itin.has_value()) << a << "->" << b;
      EXPECT_NEAR(itin->total_time(), expect, 1e-9) << a << "->" << b;
      EXPECT_DOUBLE_EQ(itin->wait_time, itin->n_boardings * 5.0);
    }
  }
}

TEST(Network, TransitRouteEdgeCases) {
  const Network& net = reference();
  const auto self = net.transit_route(0, 0);
  ASSERT_TRUE(self);
  EXPECT_EQ(self->n_boardings, 0);
  EXPECT_DOUBLE_EQ(self->total_time(), 0.0);
  EXPECT_THROW(net.transit_route(0, static_cast<StationId>(net.stations().size())), std::out_of_range);
  // Neighbouring stations 2 km apart on one line: one boarding, 2 minutes riding.
  const Line& ns = net.lines().front();
  const auto s0 = ns.stations[0], s1 = ns.stations[1];
  const auto leg = net.transit_route(s0, s1);
  ASSERT_TRUE(leg);
  const double km = ns.arc_km[1] - ns.arc_km[0];
  EXPECT_EQ(leg->n_boardings, 1);
  EXPECT_NEAR(leg->in_vehicle_time, 60.0 * km / 60.0, 1e-9);
}

TEST(Network, DumpIsDeterministic) {
  std::ostringstream a, b;
  reference().dump(a);
  Network::build(NetworkConfig{}).dump(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_FALSE(a.str().empty());
}
