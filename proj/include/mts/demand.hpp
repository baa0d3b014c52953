#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <random>
#include <string_view>
#include <vector>

#include "mts/geometry.hpp"
#include "mts/network.hpp"

namespace mts {

using Rng = std::mt19937_64;

/// The seven alternatives of the universal choice set, in canonical order.
enum class Mode : int { walk = 0, bike, car, taxi, transit, rideshare, rideshare_transit };
inline constexpr std::size_t kModeCount = 7;
inline constexpr std::array<Mode, kModeCount> kAllModes = {
    Mode::walk, Mode::bike, Mode::car, Mode::taxi, Mode::transit, Mode::rideshare,
    Mode::rideshare_transit};

constexpr std::size_t index(Mode m) { return static_cast<std::size_t>(m); }
std::string_view mode_name(Mode m);
bool is_mod(Mode m);

struct Request {
  int id = 0;
  Point origin;
  Point destination;
  double desired_pickup = 0.0;  // clock minutes
  double wtp = 0.0;             // sampled willingness to pay, $
};

/// Willingness to pay: reference car cost plus N(0, sigma) noise.
struct WtpModel {
  double car_cost_per_km = 0.33;
  double sigma = 0.0;  // variance, $^2

  double s() const;
  double reference_cost(const Request& r) const;
};

struct FareSchedule {
  double base_fare = 1.0;
  double avg_op_cost_per_km = 0.01;
  double markup_per_km = 0.1;  // per-km fare = avg_op_cost_per_km + markup_per_km
  double transit_fare = 2.75;
  double taxi_flag = 3.0;
  double taxi_per_km = 1.56;
  double car_cost_per_km = 0.33;

  double per_km() const { return avg_op_cost_per_km + markup_per_km; }
};

struct ModeSpeeds {
  double walk_kmh = 5.0;
  double bike_kmh = 16.0;
  double car_kmh = 25.0;
  double taxi_wait_min = 5.0;
};

struct AltAttributes {
  double ovtt = 0.0;  // min
  double ivtt = 0.0;  // min
  double cost = 0.0;  // $
  bool available = false;
};

using ModeAttributes = std::array<AltAttributes, kModeCount>;

/// Poisson arrivals at `lambda_per_hour` on [t0, t1) minutes with uniform
/// origins/destinations over the square region. wtp is left at 0.
std::vector<Request> generate_day(Rng& rng, double lambda_per_hour, double t0, double t1,
                                  double region_size_km);

double sample_wtp(Rng& rng, const Request& request, const WtpModel& model);

double rideshare_fare(double distance_km, const FareSchedule& schedule);

/// Walk, bike, car, taxi and transit attributes. Transit uses the best
/// entry/exit pair among the k nearest stations at each end; R and RT slots
/// are left unavailable.
ModeAttributes outside_mode_attributes(const Request& request, const Network& network,
                                       const FareSchedule& fares, const ModeSpeeds& speeds,
                                       std::size_t k_nearest);

void write_requests_csv(std::ostream& out, const std::vector<Request>& requests);
std::vector<Request> read_requests_csv(std::istream& in);

}  // namespace mts
