#include "mts/demand.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mts {

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::walk: return "walk";
    case Mode::bike: return "bike";
    case Mode::car: return "car";
    case Mode::taxi: return "taxi";
    case Mode::transit: return "transit";
    case Mode::rideshare: return "rideshare";
    case Mode::rideshare_transit: return "rideshare_transit";
  }
  return "?";
}

bool is_mod(Mode m) { return m == Mode::rideshare || m == Mode::rideshare_transit; }

double WtpModel::s() const { return std::sqrt(sigma); }

double WtpModel::reference_cost(const Request& r) const {
  return car_cost_per_km * distance_km(r.origin, r.destination);
}

std::vector<Request> generate_day(Rng& rng, double lambda_per_hour, double t0, double t1,
                                  double region_size_km) {
  if (!(lambda_per_hour > 0.0)) throw std::invalid_argument("generate_day: lambda must be positive");
  if (t1 < t0) throw std::invalid_argument("generate_day: horizon end precedes start");
  std::exponential_distribution<double> gap(lambda_per_hour / 60.0);
  std::uniform_real_distribution<double> coord(0.0, region_size_km);

  std::vector<Request> out;
  double t = t0;
  while (true) {
    t += gap(rng);
    if (t >= t1) break;
    Request r;
    r.id = static_cast<int>(out.size());
    r.desired_pickup = t;
    r.origin = {coord(rng), coord(rng)};
    do {
      r.destination = {coord(rng), coord(rng)};
    } while (r.destination == r.origin);
    out.push_back(r);
  }
  return out;
}

double sample_wtp(Rng& rng, const Request& request, const WtpModel& model) {
  const double w = model.reference_cost(request);
  const double s = model.s();
  if (s == 0.0) return w;
  std::normal_distribution<double> noise(0.0, s);
  return w + noise(rng);
}

double rideshare_fare(double distance_km, const FareSchedule& schedule) {
  if (distance_km < 0.0) throw std::invalid_argument("rideshare_fare: negative distance");
  return schedule.base_fare + schedule.per_km() * distance_km;
}

ModeAttributes outside_mode_attributes(const Request& request, const Network& network,
                                       const FareSchedule& fares, const ModeSpeeds& speeds,
                                       std::size_t k_nearest) {
  ModeAttributes attrs{};
  const Point& o = request.origin;
  const Point& d = request.destination;
  const double dist = distance_km(o, d);

  attrs[index(Mode::walk)] = {0.0, travel_time(o, d, speeds.walk_kmh), 0.0, true};
  attrs[index(Mode::bike)] = {0.0, travel_time(o, d, speeds.bike_kmh), 0.0, true};
  attrs[index(Mode::car)] = {0.0, travel_time(o, d, speeds.car_kmh), fares.car_cost_per_km * dist, true};
  attrs[index(Mode::taxi)] = {speeds.taxi_wait_min, travel_time(o, d, speeds.car_kmh),
                              fares.taxi_flag + fares.taxi_per_km * dist, true};

  AltAttributes transit{};
  double best = std::numeric_limits<double>::infinity();
  const auto entries = network.nearest_stations(o, k_nearest);
  const auto exits = network.nearest_stations(d, k_nearest);
  for (StationId a : entries) {
    const double access = travel_time(o, network.stations()[static_cast<std::size_t>(a)].location,
                                      speeds.walk_kmh);
    for (StationId b : exits) {
      if (a == b) continue;
      const auto itin = network.transit_route(a, b);
      if (!itin) continue;
      const double egress = travel_time(network.stations()[static_cast<std::size_t>(b)].location, d,
                                        speeds.walk_kmh);
      const double total = access + itin->total_time() + egress;
      if (total < best) {
        best = total;
        transit = {access + egress + itin->wait_time, itin->in_vehicle_time, fares.transit_fare, true};
      }
    }
  }
  attrs[index(Mode::transit)] = transit;
  return attrs;
}

void write_requests_csv(std::ostream& out, const std::vector<Request>& requests) {
  out << "id,ox,oy,dx,dy,t,wtp\n";
  out << std::setprecision(17);
  for (const Request& r : requests) {
    out << r.id << ',' << r.origin.x << ',' << r.origin.y << ',' << r.destination.x << ','
        << r.destination.y << ',' << r.desired_pickup << ',' << r.wtp << '\n';
  }
}

std::vector<Request> read_requests_csv(std::istream& in) {
  std::vector<Request> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::istringstream row(line);
    Request r;
    char c1, c2, c3, c4, c5, c6;
    if (!(row >> r.id >> c1 >> r.origin.x >> c2 >> r.origin.y >> c3 >> r.destination.x >> c4 >>
          r.destination.y >> c5 >> r.desired_pickup >> c6 >> r.wtp)) {
      throw std::runtime_error("requests csv: malformed row at line " + std::to_string(line_no));
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace mts
