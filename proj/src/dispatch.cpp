#include "mts/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mts {

void DispatchConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("dispatch: gamma must lie in [0,1]");
  if (beta_delay < 0.0) throw std::invalid_argument("dispatch: beta_delay must be non-negative");
  if (!(speed_kmh > 0.0)) throw std::invalid_argument("dispatch: speed must be positive");
  if (service_radius_km < 0.0) throw std::invalid_argument("dispatch: negative service radius");
  if (!(relocation_interval_min > 0.0)) throw std::invalid_argument("dispatch: relocation interval must be positive");
  if (k_nearest < 1) throw std::invalid_argument("dispatch: k_nearest must be at least 1");
}

TourSchedule schedule_tour(const VehicleState& vehicle, std::span<const Stop> stops, double speed_kmh) {
  TourSchedule out;
  out.times.reserve(stops.size());
  Point at = vehicle.position;
  double t = vehicle.time;
  int load = vehicle.onboard;
  out.peak_load = load;
  for (std::size_t i = 0; i < stops.size(); ++i) {
    const Stop& s = stops[i];
    const double km = distance_km(at, s.location);
    out.distance_km += km;
    t += 60.0 * km / speed_kmh;
    at = s.location;
    out.times.push_back(t);
    if (s.kind == StopKind::pickup) {
      ++load;
      for (std::size_t j = 0; j < i; ++j) {
        if (stops[j].kind == StopKind::dropoff && stops[j].request == s.request) return out;
      }
    } else {
      --load;
      out.journey_sum += t - s.request_time;
    }
    if (load > vehicle.capacity || load < 0) return out;
    out.peak_load = std::max(out.peak_load, load);
  }
  out.duration = t - vehicle.time;
  out.feasible = true;
  return out;
}

namespace {

double cost_of(const TourSchedule& s, const DispatchConfig& config) {
  return config.gamma * s.duration +
         (1.0 - config.gamma) * (config.beta_delay * s.duration * s.duration + s.journey_sum);
}

}  // namespace

double tour_cost(const VehicleState& vehicle, const Tour& tour, const DispatchConfig& config) {
  const TourSchedule s = schedule_tour(vehicle, tour.stops, config.speed_kmh);
  if (!s.feasible) throw std::invalid_argument("tour_cost: infeasible tour");
  return cost_of(s, config);
}

std::optional<Insertion> insert_request(const VehicleState& vehicle, int request, double request_time,
                                        const Point& pickup, const Point& dropoff,
                                        const DispatchConfig& config) {
  const auto& old_stops = vehicle.tour.stops;
  const TourSchedule base = schedule_tour(vehicle, old_stops, config.speed_kmh);
  if (!base.feasible) throw std::invalid_argument("insert_request: current tour infeasible");
  const double base_cost = cost_of(base, config);

  const Stop p{StopKind::pickup, request, pickup, 0.0, request_time};
  const Stop d{StopKind::dropoff, request, dropoff, 0.0, request_time};
  const std::size_t m = old_stops.size();

  std::optional<Insertion> best;
  std::vector<Stop> trial;
  trial.reserve(m + 2);
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = i; j <= m; ++j) {
      // Pickup before old stop i, dropoff before old stop j (after the pickup).
      trial.clear();
      for (std::size_t k = 0; k <= m; ++k) {
        if (k == i) trial.push_back(p);
        if (k == j) trial.push_back(d);
        if (k < m) trial.push_back(old_stops[k]);
      }
      const TourSchedule s = schedule_tour(vehicle, trial, config.speed_kmh);
      if (!s.feasible) continue;
      const double marginal = cost_of(s, config) - base_cost;
      if (!best || marginal < best->marginal_cost) {
        Insertion ins;
        ins.tour.stops = trial;
        for (std::size_t k = 0; k < trial.size(); ++k) ins.tour.stops[k].planned_time = s.times[k];
        ins.marginal_cost = marginal;
        ins.added_km = s.distance_km - base.distance_km;
        ins.pickup_position = i;
        ins.dropoff_position = j + 1;
        ins.pickup_time = s.times[i];
        ins.dropoff_time = s.times[j + 1];
        best = std::move(ins);
      }
    }
  }
  return best;
}

std::optional<VehicleChoice> best_vehicle(std::span<const VehicleState> fleet, int request,
                                          double request_time, const Point& pickup,
                                          const Point& dropoff, const DispatchConfig& config) {
  std::optional<VehicleChoice> best;
  for (const VehicleState& v : fleet) {
    if (distance_km(v.position, pickup) > config.service_radius_km) continue;
    auto ins = insert_request(v, request, request_time, pickup, dropoff, config);
    if (!ins) continue;
    if (!best || ins->marginal_cost < best->insertion.marginal_cost) {
      best = VehicleChoice{v.id, std::move(*ins)};
    }
  }
  return best;
}

std::optional<Offer> generate_offer_R(const Request& request, std::span<const VehicleState> fleet,
                                      const DispatchConfig& config, const FareSchedule& fares) {
  auto choice = best_vehicle(fleet, request.id, request.desired_pickup, request.origin,
                             request.destination, config);
  if (!choice) return std::nullopt;
  Offer offer;
  offer.kind = Mode::rideshare;
  offer.vehicle = choice->vehicle;
  offer.leg_km = distance_km(request.origin, request.destination);
  offer.fare = rideshare_fare(offer.leg_km, fares);
  offer.added_km = choice->insertion.added_km;
  offer.op_cost = fares.avg_op_cost_per_km * offer.added_km;
  offer.pickup_time = choice->insertion.pickup_time;
  offer.vehicle_dropoff_time = choice->insertion.dropoff_time;
  offer.vehicle_dropoff = request.destination;
  offer.ovtt = offer.pickup_time - request.desired_pickup;
  offer.ivtt = offer.vehicle_dropoff_time - offer.pickup_time;
  offer.tour = std::move(choice->insertion.tour);
  return offer;
}

std::optional<Offer> generate_offer_RT(const Request& request, std::span<const VehicleState> fleet,
                                       const Network& network, const DispatchConfig& config,
                                       const FareSchedule& fares, const ModeSpeeds& speeds) {
  const auto entries = network.nearest_stations(request.origin, config.k_nearest);
  const auto exits = network.nearest_stations(request.destination, config.k_nearest);
  std::optional<Offer> best;
  double best_time = std::numeric_limits<double>::infinity();
  int pairs = 0;
  for (StationId entry : entries) {
    const Point station = network.stations()[static_cast<std::size_t>(entry)].location;
    // The rideshare leg depends only on the entry station.
    std::optional<VehicleChoice> leg;
    bool leg_done = false;
    for (StationId exit : exits) {
      ++pairs;
      if (entry == exit) continue;
      auto itin = network.transit_route(entry, exit);
      if (!itin) continue;
      if (!leg_done) {
        leg = best_vehicle(fleet, request.id, request.desired_pickup, request.origin, station, config);
        leg_done = true;
      }
      if (!leg) continue;
      const double egress = travel_time(network.stations()[static_cast<std::size_t>(exit)].location,
                                        request.destination, speeds.walk_kmh);
      const double door_to_door = (leg->insertion.dropoff_time - request.desired_pickup) +
                                  itin->total_time() + egress;
      if (door_to_door < best_time) {
        best_time = door_to_door;
        Offer offer;
        offer.kind = Mode::rideshare_transit;
        offer.vehicle = leg->vehicle;
        offer.tour = leg->insertion.tour;
        offer.leg_km = distance_km(request.origin, station);
        offer.fare = rideshare_fare(offer.leg_km, fares) + fares.transit_fare;
        offer.added_km = leg->insertion.added_km;
        offer.op_cost = fares.avg_op_cost_per_km * offer.added_km;
        offer.pickup_time = leg->insertion.pickup_time;
        offer.vehicle_dropoff_time = leg->insertion.dropoff_time;
        offer.vehicle_dropoff = station;
        offer.walk_egress = egress;
        offer.ovtt = (offer.pickup_time - request.desired_pickup) + itin->wait_time + egress;
        offer.ivtt = (offer.vehicle_dropoff_time - offer.pickup_time) + itin->in_vehicle_time;
        offer.itinerary = std::move(itin);
        best = std::move(offer);
      }
    }
  }
  if (best) best->pairs_evaluated = pairs;
  return best;
}

std::vector<Relocation> relocate_idle(std::span<const VehicleState> fleet, const Network& network,
                                      std::span<const int> recent_demand) {
  const std::size_t zones = network.zones().size();
  if (recent_demand.size() != zones) throw std::invalid_argument("relocate_idle: demand per zone expected");

  struct Candidate {
    int vehicle;
    ZoneId home;
    Point position;
    bool moved = false;
  };
  std::vector<Candidate> idle;
  std::vector<long> surplus(zones);
  for (std::size_t z = 0; z < zones; ++z) surplus[z] = recent_demand[z];
  for (const VehicleState& v : fleet) {
    if (!v.tour.stops.empty()) continue;
    const Point anchor = v.status == VehicleStatus::relocating ? v.relocation_target : v.position;
    const ZoneId home = network.zone_of(anchor);
    idle.push_back({v.id, home, v.position});
    --surplus[static_cast<std::size_t>(home)];
  }

  std::vector<Relocation> out;
  while (true) {
    const auto target_it = std::max_element(surplus.begin(), surplus.end());
    const auto target = static_cast<ZoneId>(target_it - surplus.begin());
    if (*target_it <= 0) break;
    const Point centroid = network.zones()[static_cast<std::size_t>(target)].centroid;
    Candidate* pick = nullptr;
    double pick_km = std::numeric_limits<double>::infinity();
    for (Candidate& c : idle) {
      if (c.moved || c.home == target) continue;
      if (surplus[static_cast<std::size_t>(c.home)] + 1 >= *target_it) continue;  // no balance gain
      const double km = distance_km(c.position, centroid);
      if (km < pick_km) {
        pick_km = km;
        pick = &c;
      }
    }
    if (pick == nullptr) break;
    pick->moved = true;
    ++surplus[static_cast<std::size_t>(pick->home)];
    --surplus[static_cast<std::size_t>(target)];
    out.push_back({pick->vehicle, target, centroid});
  }
  return out;
}

Fleet::Fleet(const std::vector<Point>& depots, int fleet_size, int capacity, const DispatchConfig& config,
             double start_time)
    : config_(config), time_(start_time) {
  config.validate();
  if (fleet_size < 0) throw std::invalid_argument("fleet: negative fleet size");
  if (capacity < 1) throw std::invalid_argument("fleet: capacity must be at least 1");
  if (fleet_size > 0 && depots.empty()) throw std::invalid_argument("fleet: no depots");
  for (int i = 0; i < fleet_size; ++i) {
    VehicleState v;
    v.id = i;
    v.depot = depots[static_cast<std::size_t>(i) % depots.size()];
    v.position = v.depot;
    v.time = start_time;
    v.capacity = capacity;
    vehicles_.push_back(v);
  }
}

std::vector<FleetEvent> Fleet::advance_vehicle(VehicleState& v, double to_time) {
  std::vector<FleetEvent> events;
  const double speed = config_.speed_kmh;
  while (true) {
    const bool has_stop = !v.tour.stops.empty();
    if (!has_stop && v.status != VehicleStatus::relocating) break;
    const Point goal = has_stop ? v.tour.stops.front().location : v.relocation_target;
    const double km = distance_km(v.position, goal);
    const double minutes = 60.0 * km / speed;
    if (v.time + minutes <= to_time) {
      v.position = goal;
      v.time += minutes;
      v.travel_km += km;
      v.travel_minutes += minutes;
      if (has_stop) {
        const Stop s = v.tour.stops.front();
        v.tour.stops.erase(v.tour.stops.begin());
        v.onboard += s.kind == StopKind::pickup ? 1 : -1;
        events.push_back({v.time, v.id, s.kind == StopKind::pickup ? EventKind::pickup : EventKind::dropoff,
                          s.request, s.location});
      } else {
        v.status = VehicleStatus::idle;
        events.push_back({v.time, v.id, EventKind::relocation_arrival, -1, goal});
      }
      continue;
    }
    const double dt = to_time - v.time;
    if (dt > 0.0) {
      const double frac = dt / minutes;
      v.position = lerp(v.position, goal, frac);
      v.travel_km += km * frac;
      v.travel_minutes += dt;
    }
    break;
  }
  v.time = std::max(v.time, to_time);
  if (!v.tour.stops.empty()) {
    v.status = VehicleStatus::serving;
  } else if (v.status == VehicleStatus::serving) {
    v.status = VehicleStatus::idle;
  }
  return events;
}

std::vector<FleetEvent> Fleet::advance(double to_time) {
  if (to_time < time_) throw std::invalid_argument("fleet: cannot advance backwards in time");
  std::vector<FleetEvent> events;
  for (VehicleState& v : vehicles_) {
    auto e = advance_vehicle(v, to_time);
    events.insert(events.end(), e.begin(), e.end());
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const FleetEvent& a, const FleetEvent& b) { return a.time < b.time; });
  time_ = to_time;
  return events;
}

void Fleet::commit(int vehicle, Tour tour) {
  VehicleState& v = vehicles_.at(static_cast<std::size_t>(vehicle));
  const TourSchedule s = schedule_tour(v, tour.stops, config_.speed_kmh);
  if (!s.feasible) throw std::invalid_argument("fleet: committed tour infeasible");
  for (std::size_t k = 0; k < tour.stops.size(); ++k) tour.stops[k].planned_time = s.times[k];
  v.tour = std::move(tour);
  v.status = v.tour.stops.empty() ? VehicleStatus::idle : VehicleStatus::serving;
}

void Fleet::apply(std::span<const Relocation> relocations) {
  for (const Relocation& r : relocations) {
    VehicleState& v = vehicles_.at(static_cast<std::size_t>(r.vehicle));
    if (!v.tour.stops.empty()) continue;
    v.status = VehicleStatus::relocating;
    v.relocation_target = r.target;
  }
}

std::vector<FleetEvent> Fleet::finish_day() {
  std::vector<FleetEvent> events;
  double end = time_;
  for (VehicleState& v : vehicles_) {
    if (v.status == VehicleStatus::relocating) v.status = VehicleStatus::idle;
    const TourSchedule rest = schedule_tour(v, v.tour.stops, config_.speed_kmh);
    const double last = rest.times.empty() ? v.time : rest.times.back();
    auto e = advance_vehicle(v, last + 1e-9);
    events.insert(events.end(), e.begin(), e.end());
    const double km = distance_km(v.position, v.depot);
    const double minutes = 60.0 * km / config_.speed_kmh;
    v.time += minutes;
    v.travel_km += km;
    v.travel_minutes += minutes;
    v.position = v.depot;
    v.status = VehicleStatus::idle;
    events.push_back({v.time, v.id, EventKind::depot_return, -1, v.depot});
    end = std::max(end, v.time);
  }
  for (VehicleState& v : vehicles_) v.time = end;
  time_ = end;
  std::stable_sort(events.begin(), events.end(),
                   [](const FleetEvent& a, const FleetEvent& b) { return a.time < b.time; });
  return events;
}

}  // namespace mts
