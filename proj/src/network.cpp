#include "mts/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace mts {

namespace {

constexpr double kEps = 1e-9;

std::vector<double> segment_lengths(const Line& line) {
  std::vector<double> out;
  const auto& p = line.polyline;
  const std::size_t n = line.closed ? p.size() : p.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(distance_km(p[i], p[(i + 1) % p.size()]));
  }
  return out;
}

Point point_at_arc(const Line& line, double arc) {
  const auto lengths = segment_lengths(line);
  const auto& p = line.polyline;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (arc <= lengths[i] + kEps || i + 1 == lengths.size()) {
      const double f = lengths[i] > 0.0 ? std::clamp(arc / lengths[i], 0.0, 1.0) : 0.0;
      return lerp(p[i], p[(i + 1) % p.size()], f);
    }
    arc -= lengths[i];
  }
  return p.front();
}

// Arc positions on `a` where it crosses `b` (proper or touching crossings).
std::vector<double> crossing_arcs(const Line& a, const Line& b) {
  std::vector<double> out;
  const auto la = segment_lengths(a);
  const auto lb = segment_lengths(b);
  double arc_base = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    const Point p = a.polyline[i];
    const Point p2 = a.polyline[(i + 1) % a.polyline.size()];
    const double rx = p2.x - p.x, ry = p2.y - p.y;
    for (std::size_t j = 0; j < lb.size(); ++j) {
      const Point q = b.polyline[j];
      const Point q2 = b.polyline[(j + 1) % b.polyline.size()];
      const double sx = q2.x - q.x, sy = q2.y - q.y;
      const double denom = rx * sy - ry * sx;
      if (std::abs(denom) < kEps) continue;  // parallel
      const double qpx = q.x - p.x, qpy = q.y - p.y;
      const double t = (qpx * sy - qpy * sx) / denom;
      const double u = (qpx * ry - qpy * rx) / denom;
      if (t >= -kEps && t <= 1.0 + kEps && u >= -kEps && u <= 1.0 + kEps) {
        out.push_back(arc_base + std::clamp(t, 0.0, 1.0) * la[i]);
      }
    }
    arc_base += la[i];
  }
  return out;
}

Line make_line(std::string name, std::vector<Point> vertices, bool closed) {
  Line line;
  line.name = std::move(name);
  line.polyline = std::move(vertices);
  line.closed = closed;
  for (double len : segment_lengths(line)) line.length_km += len;
  return line;
}

Line make_ring(std::string name, double centre, double half_width) {
  const double lo = centre - half_width, hi = centre + half_width;
  return make_line(std::move(name), {{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}}, true);
}

}  // namespace

Network Network::build(const NetworkConfig& config) {
  if (!(config.region_size_km > 0.0) || !(config.station_spacing_km > 0.0)) {
    throw std::invalid_argument("network: region size and station spacing must be positive");
  }
  if (config.station_spacing_km > config.region_size_km) {
    throw std::invalid_argument("network: station spacing exceeds region size");
  }
  if (!(config.transit_speed_kmh > 0.0) || config.boarding_wait_min < 0.0) {
    throw std::invalid_argument("network: invalid transit speed or boarding wait");
  }
  const int dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(config.zone_count))));
  if (config.zone_count <= 0 || dim * dim != config.zone_count) {
    throw std::invalid_argument("network: zone count must be a positive perfect square");
  }
  const double size = config.region_size_km;
  const double centre = size / 2.0;
  for (double hw : {config.inner_ring_half_width_km, config.outer_ring_half_width_km}) {
    if (!(hw > 0.0) || hw > centre) {
      throw std::invalid_argument("network: ring half-width must lie inside the region");
    }
  }

  Network net;
  net.config_ = config;
  net.grid_dim_ = dim;

  const double w = size / dim;
  for (int ix = 0; ix < dim; ++ix) {
    for (int iy = 0; iy < dim; ++iy) {
      Zone z;
      z.id = ix * dim + iy;
      z.bounds = {ix * w, iy * w, (ix + 1) * w, (iy + 1) * w};
      z.centroid = {(ix + 0.5) * w, (iy + 0.5) * w};
      net.zones_.push_back(z);
      net.depots_.push_back(z.centroid);
    }
  }

  net.lines_.push_back(make_line("north-south", {{centre, 0.0}, {centre, size}}, false));
  net.lines_.push_back(make_line("east-west", {{0.0, centre}, {size, centre}}, false));
  net.lines_.push_back(make_line("northeast-southwest", {{size, size}, {0.0, 0.0}}, false));
  net.lines_.push_back(make_line("northwest-southeast", {{0.0, size}, {size, 0.0}}, false));
  net.lines_.push_back(make_ring("inner-ring", centre, config.inner_ring_half_width_km));
  net.lines_.push_back(make_ring("outer-ring", centre, config.outer_ring_half_width_km));

  const double merge = config.station_merge_km;
  const double spacing = config.station_spacing_km;
  for (std::size_t li = 0; li < net.lines_.size(); ++li) {
    Line& line = net.lines_[li];

    std::vector<double> crossings;
    for (std::size_t lj = 0; lj < net.lines_.size(); ++lj) {
      if (lj == li) continue;
      for (double a : crossing_arcs(line, net.lines_[lj])) crossings.push_back(a);
    }

    std::vector<double> arcs;
    const int steps = static_cast<int>(std::floor(line.length_km / spacing + kEps));
    for (int s = 0; s <= steps; ++s) arcs.push_back(s * spacing);
    if (!line.closed && line.length_km - arcs.back() > merge) arcs.push_back(line.length_km);
    if (line.closed && line.length_km - arcs.back() < merge) arcs.pop_back();

    auto near_crossing = [&](double a) {
      for (double c : crossings) {
        double d = std::abs(a - c);
        if (line.closed) d = std::min(d, line.length_km - d);
        if (d < merge) return true;
      }
      return false;
    };
    std::erase_if(arcs, near_crossing);
    for (double c : crossings) {
      if (line.closed && c >= line.length_km - kEps) c = 0.0;
      arcs.push_back(c);
    }
    std::sort(arcs.begin(), arcs.end());

    for (double a : arcs) {
      const Point p = point_at_arc(line, a);
      StationId id = -1;
      for (const Station& s : net.stations_) {
        if (distance_km(s.location, p) < merge) {
          id = s.id;
          break;
        }
      }
      if (id < 0) {
        id = static_cast<StationId>(net.stations_.size());
        net.stations_.push_back({id, p, {}});
      }
      if (!line.stations.empty() && line.stations.back() == id) continue;
      if (line.closed && !line.stations.empty() && line.stations.front() == id) continue;
      line.stations.push_back(id);
      line.arc_km.push_back(a);
      auto& served = net.stations_[id].lines;
      if (std::find(served.begin(), served.end(), static_cast<int>(li)) == served.end()) {
        served.push_back(static_cast<int>(li));
      }
    }
  }

  net.compute_routes();
  return net;
}

std::vector<StationId> Network::nearest_stations(const Point& p, std::size_t k) const {
  std::vector<std::pair<double, StationId>> ranked;
  ranked.reserve(stations_.size());
  for (const Station& s : stations_) ranked.emplace_back(distance_km(p, s.location), s.id);
  const std::size_t n = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end());
  std::vector<StationId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(ranked[i].second);
  return out;
}

std::optional<TransitItinerary> Network::transit_route(StationId entry, StationId exit) const {
  const auto n = static_cast<StationId>(stations_.size());
  if (entry < 0 || exit < 0 || entry >= n || exit >= n) {
    throw std::out_of_range("transit_route: unknown station");
  }
  return routes_[static_cast<std::size_t>(entry) * stations_.size() + static_cast<std::size_t>(exit)];
}

void Network::compute_routes() {
  const std::size_t n = stations_.size();
  routes_.assign(n * n, std::nullopt);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      routes_[a * n + b] = shortest_itinerary(static_cast<StationId>(a), static_cast<StationId>(b));
    }
  }
}

// Dijkstra over (station, line) states. Boarding and transferring cost one
// boarding wait each; riding costs arc distance at transit speed. Equal times
// are broken by fewer boardings.
std::optional<TransitItinerary> Network::shortest_itinerary(StationId entry,
                                                            StationId exit) const {
  TransitItinerary itin;
  itin.entry = entry;
  itin.exit = exit;
  if (entry == exit) return itin;

  struct Node {
    StationId station;
    int line;
    int position;  // index within the line's station list
  };
  std::vector<Node> nodes;
  std::vector<std::vector<int>> node_of_line(lines_.size());
  for (std::size_t l = 0; l < lines_.size(); ++l) {
    for (std::size_t i = 0; i < lines_[l].stations.size(); ++i) {
      node_of_line[l].push_back(static_cast<int>(nodes.size()));
      nodes.push_back({lines_[l].stations[i], static_cast<int>(l), static_cast<int>(i)});
    }
  }
  const double minutes_per_km = 60.0 / config_.transit_speed_kmh;
  const double wait = config_.boarding_wait_min;

  using Cost = std::pair<double, int>;  // (minutes, boardings)
  const Cost inf{std::numeric_limits<double>::infinity(), 0};
  std::vector<Cost> best(nodes.size(), inf);
  std::vector<int> pred(nodes.size(), -1);
  using Item = std::tuple<double, int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;

  auto relax = [&](int to, Cost c, int from) {
    const auto& cur = best[static_cast<std::size_t>(to)];
    if (c.first < cur.first - kEps || (std::abs(c.first - cur.first) <= kEps && c.second < cur.second)) {
      best[static_cast<std::size_t>(to)] = c;
      pred[static_cast<std::size_t>(to)] = from;
      heap.emplace(c.first, c.second, to);
    }
  };

  for (int l : stations_[static_cast<std::size_t>(entry)].lines) {
    const auto& ids = lines_[static_cast<std::size_t>(l)].stations;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == entry) relax(node_of_line[static_cast<std::size_t>(l)][i], {wait, 1}, -1);
    }
  }

  int reached = -1;
  while (!heap.empty()) {
    const auto [t, boardings, u] = heap.top();
    heap.pop();
    const auto uu = static_cast<std::size_t>(u);
    if (t > best[uu].first + kEps || boardings != best[uu].second) continue;
    const Node& node = nodes[uu];
    if (node.station == exit) {
      reached = u;
      break;
    }
    const Line& line = lines_[static_cast<std::size_t>(node.line)];
    const int m = static_cast<int>(line.stations.size());
    for (int dir : {-1, 1}) {
      int next = node.position + dir;
      double arc = 0.0;
      if (next < 0 || next >= m) {
        if (!line.closed || m < 2) continue;
        next = (next + m) % m;
        arc = line.length_km - std::abs(line.arc_km[static_cast<std::size_t>(node.position)] -
                                        line.arc_km[static_cast<std::size_t>(next)]);
      } else {
        arc = std::abs(line.arc_km[static_cast<std::size_t>(next)] -
                       line.arc_km[static_cast<std::size_t>(node.position)]);
      }
      relax(node_of_line[static_cast<std::size_t>(node.line)][static_cast<std::size_t>(next)],
            {t + arc * minutes_per_km, boardings}, u);
    }
    for (int l : stations_[static_cast<std::size_t>(node.station)].lines) {
      if (l == node.line) continue;
      const auto& ids = lines_[static_cast<std::size_t>(l)].stations;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == node.station) {
          relax(node_of_line[static_cast<std::size_t>(l)][i], {t + wait, boardings + 1}, u);
        }
      }
    }
  }
  if (reached < 0) return std::nullopt;

  std::vector<int> path;
  for (int v = reached; v >= 0; v = pred[static_cast<std::size_t>(v)]) path.push_back(v);
  std::reverse(path.begin(), path.end());

  itin.n_boardings = best[static_cast<std::size_t>(reached)].second;
  itin.wait_time = itin.n_boardings * wait;
  double ride_km = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Node& a = nodes[static_cast<std::size_t>(path[i - 1])];
    const Node& b = nodes[static_cast<std::size_t>(path[i])];
    if (a.line != b.line) continue;  // transfer
    const Line& line = lines_[static_cast<std::size_t>(a.line)];
    double d = std::abs(line.arc_km[static_cast<std::size_t>(a.position)] -
                        line.arc_km[static_cast<std::size_t>(b.position)]);
    if (line.closed) d = std::min(d, line.length_km - d);
    ride_km += d;
    if (!itin.legs.empty() && itin.legs.back().line == a.line && itin.legs.back().to == a.station) {
      itin.legs.back().to = b.station;
      itin.legs.back().distance_km += d;
    } else {
      itin.legs.push_back({a.line, a.station, b.station, d});
    }
  }
  itin.in_vehicle_time = ride_km * minutes_per_km;
  return itin;
}

bool Network::contains(const Point& p) const {
  const double s = config_.region_size_km;
  return p.x >= 0.0 && p.x <= s && p.y >= 0.0 && p.y <= s;
}

ZoneId Network::zone_of(const Point& p) const {
  if (!contains(p)) throw std::out_of_range("zone_of: point outside region");
  const double w = config_.region_size_km / grid_dim_;
  auto cell = [&](double v) {
    return std::clamp(static_cast<int>(std::ceil(v / w)) - 1, 0, grid_dim_ - 1);
  };
  return cell(p.x) * grid_dim_ + cell(p.y);
}

void Network::dump(std::ostream& out) const {
  out << "# zones " << zones_.size() << "\n";
  for (const Zone& z : zones_) {
    out << "zone " << z.id << " centroid " << z.centroid.x << ' ' << z.centroid.y << "\n";
  }
  out << "# stations " << stations_.size() << "\n";
  for (const Station& s : stations_) {
    out << "station " << s.id << ' ' << s.location.x << ' ' << s.location.y << " lines";
    for (int l : s.lines) out << ' ' << l;
    out << "\n";
  }
  out << "# lines " << lines_.size() << "\n";
  for (std::size_t l = 0; l < lines_.size(); ++l) {
    const Line& line = lines_[l];
    out << "line " << l << ' ' << line.name << (line.closed ? " closed" : " open")
        << " length_km " << line.length_km << " stations";
    for (StationId s : line.stations) out << ' ' << s;
    out << "\n";
  }
}

}  // namespace mts
