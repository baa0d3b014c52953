#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mts/demand.hpp"
#include "mts/network.hpp"

namespace mts {

enum class StopKind { pickup, dropoff };

struct Stop {
  StopKind kind = StopKind::pickup;
  int request = 0;
  Point location;
  double planned_time = 0.0;
  double request_time = 0.0;  // when the passenger asked for the ride
};

struct Tour {
  std::vector<Stop> stops;
};

struct DispatchConfig {
  double gamma = 0.5;
  double beta_delay = 0.01;  // weight of the squared tour duration, 1/min
  double service_radius_km = 5.0;
  double relocation_interval_min = 15.0;
  double speed_kmh = 25.0;
  std::size_t k_nearest = 4;

  void validate() const;
};

enum class VehicleStatus { idle, serving, relocating };

struct VehicleState {
  int id = 0;
  Point position;
  double time = 0.0;  // clock time of `position`
  Tour tour;
  int capacity = 10;
  int onboard = 0;
  Point depot;
  VehicleStatus status = VehicleStatus::idle;
  Point relocation_target;
  double travel_minutes = 0.0;
  double travel_km = 0.0;
};

/// Schedule of a stop sequence driven from a vehicle's current state.
struct TourSchedule {
  bool feasible = false;
  double duration = 0.0;       // T: minutes from now until the last stop
  double journey_sum = 0.0;    // sum of (dropoff time - request time) over dropoffs
  double distance_km = 0.0;
  std::vector<double> times;   // arrival time per stop
  int peak_load = 0;
};

TourSchedule schedule_tour(const VehicleState& vehicle, std::span<const Stop> stops, double speed_kmh);

/// gamma T + (1 - gamma)(beta T^2 + sum_n Y_n). Throws on an infeasible tour.
double tour_cost(const VehicleState& vehicle, const Tour& tour, const DispatchConfig& config);

struct Insertion {
  Tour tour;  // with planned times filled in
  double marginal_cost = 0.0;
  double added_km = 0.0;
  double pickup_time = 0.0;
  double dropoff_time = 0.0;
  std::size_t pickup_position = 0;
  std::size_t dropoff_position = 0;  // index in the new tour
};

/// Cheapest order-preserving insertion of a pickup/dropoff pair; ties go to
/// the earliest pickup position, then the earliest dropoff position.
std::optional<Insertion> insert_request(const VehicleState& vehicle, int request, double request_time,
                                        const Point& pickup, const Point& dropoff,
                                        const DispatchConfig& config);

struct VehicleChoice {
  int vehicle = -1;
  Insertion insertion;
};

/// argmin of marginal insertion cost over vehicles within the service radius
/// of `pickup`; ties go to the lower vehicle id.
std::optional<VehicleChoice> best_vehicle(std::span<const VehicleState> fleet, int request,
                                          double request_time, const Point& pickup,
                                          const Point& dropoff, const DispatchConfig& config);

struct Offer {
  Mode kind = Mode::rideshare;
  double fare = 0.0;
  double op_cost = 0.0;
  double ovtt = 0.0;
  double ivtt = 0.0;
  int vehicle = -1;
  Tour tour;
  double pickup_time = 0.0;
  double vehicle_dropoff_time = 0.0;
  Point vehicle_dropoff;  // destination, or the entry station for RT
  double leg_km = 0.0;    // distance charged by the per-km fare
  double added_km = 0.0;
  // Rideshare+transit only.
  std::optional<TransitItinerary> itinerary;
  double walk_egress = 0.0;
  int pairs_evaluated = 0;

  /// Minutes after the vehicle drop-off until the passenger reaches the destination.
  double onward_time() const { return itinerary ? itinerary->total_time() + walk_egress : 0.0; }
};

std::optional<Offer> generate_offer_R(const Request& request, std::span<const VehicleState> fleet,
                                      const DispatchConfig& config, const FareSchedule& fares);

std::optional<Offer> generate_offer_RT(const Request& request, std::span<const VehicleState> fleet,
                                       const Network& network, const DispatchConfig& config,
                                       const FareSchedule& fares, const ModeSpeeds& speeds);

enum class EventKind { pickup, dropoff, relocation_arrival, depot_return };

struct FleetEvent {
  double time = 0.0;
  int vehicle = 0;
  EventKind kind = EventKind::pickup;
  int request = -1;
  Point location;
};

struct Relocation {
  int vehicle = 0;
  ZoneId zone = 0;
  Point target;
};

/// Myopic rebalancing: repeatedly send the nearest idle vehicle to the zone
/// with the largest (recent demand - idle supply) surplus, as long as the
/// move does not leave its own zone worse off than the target.
std::vector<Relocation> relocate_idle(std::span<const VehicleState> fleet, const Network& network,
                                      std::span<const int> recent_demand);

class Fleet {
 public:
  /// Vehicles are spread round-robin over the depots.
  Fleet(const std::vector<Point>& depots, int fleet_size, int capacity, const DispatchConfig& config,
        double start_time);

  std::span<const VehicleState> vehicles() const { return vehicles_; }
  double time() const { return time_; }

  /// Move every vehicle along its plan up to `to_time`; events in time order.
  std::vector<FleetEvent> advance(double to_time);

  /// Replace a vehicle's tour with an accepted insertion.
  void commit(int vehicle, Tour tour);

  void apply(std::span<const Relocation> relocations);

  /// Complete all committed tours, then drive every vehicle back to its depot.
  std::vector<FleetEvent> finish_day();

 private:
  std::vector<FleetEvent> advance_vehicle(VehicleState& v, double to_time);

  std::vector<VehicleState> vehicles_;
  DispatchConfig config_;
  double time_ = 0.0;
};

}  // namespace mts
