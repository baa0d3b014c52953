// Random instance generators shared by unit and acceptance tests.
#pragma once

#include <random>

#include "mts/dispatch.hpp"
#include "mts/pricing.hpp"

namespace fixtures {

struct PricingInstance {
  mts::Assortment assortment;
  mts::ChoiceContext context;
  double w = 0.0;
  double s = 0.0;
};

/// A single request's pricing problem with realistic magnitudes.
inline PricingInstance random_pricing_instance(mts::Rng& rng) {
  using namespace mts;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PricingInstance inst;
  const double km = 1.0 + 19.0 * u(rng);
  NlParams p = NlParams::reference_truth();
  p.beta_ovtt *= 0.5 + u(rng);
  p.beta_ivtt *= 0.5 + u(rng);
  p.beta_cost = -(0.02 + 0.2 * u(rng));
  p.mu = {0.5 + 2.0 * u(rng), 0.5 + 2.0 * u(rng), 0.5 + 2.0 * u(rng)};
  ModeAttributes a{};
  a[index(Mode::walk)] = {0, 12.0 * km, 0, true};
  a[index(Mode::bike)] = {0, 3.75 * km, 0, true};
  a[index(Mode::car)] = {0, 2.4 * km, 0.33 * km, u(rng) < 0.9};
  a[index(Mode::taxi)] = {5, 2.4 * km, 3 + 1.56 * km, true};
  a[index(Mode::transit)] = {10 + 30 * u(rng), 1.0 * km + 5 * u(rng), 2.75, u(rng) < 0.95};
  inst.context.utilities = mode_utilities(p, a);
  for (std::size_t j = 0; j < kModeCount; ++j) inst.context.available[j] = a[j].available;
  inst.context.mu = p.mu;
  inst.context.beta_cost = p.beta_cost;

  const double cbar = 0.6 * u(rng);
  const bool both = u(rng) < 0.7;
  const bool r_only = !both && u(rng) < 0.5;
  if (both || r_only) {
    const double fare = 1.0 + (cbar + 0.1) * km;
    AltAttributes r{2 + 15 * u(rng), 2.4 * km * (1 + 0.5 * u(rng)), fare, true};
    inst.assortment.options.push_back(
        {Mode::rideshare, fare, cbar * km * (0.2 + u(rng)), systematic_utility(p, Mode::rideshare, r)});
  }
  if (both || !r_only) {
    const double leg = 0.3 + 3.0 * u(rng);
    const double fare = 1.0 + (cbar + 0.1) * leg + 2.75;
    AltAttributes rt{5 + 20 * u(rng), 0.5 * km + 8 * u(rng), fare, true};
    inst.assortment.options.push_back({Mode::rideshare_transit, fare, cbar * leg * (0.2 + u(rng)),
                                       systematic_utility(p, Mode::rideshare_transit, rt)});
  }
  inst.w = 0.33 * km;
  const double sigmas[] = {0.0, 1.0, 4.0};
  inst.s = std::sqrt(sigmas[static_cast<int>(u(rng) * 3) % 3]);
  return inst;
}

/// A vehicle with up to `max_pending` requests, some already on board.
inline mts::VehicleState random_vehicle(mts::Rng& rng, int max_pending, int capacity) {
  using namespace mts;
  std::uniform_real_distribution<double> coord(0.0, 20.0), u(0.0, 1.0);
  VehicleState v;
  v.id = 0;
  v.capacity = capacity;
  v.position = {coord(rng), coord(rng)};
  v.time = 450.0;
  const int pending = static_cast<int>(u(rng) * (max_pending + 1)) % (max_pending + 1);
  std::vector<Stop> stops;
  for (int r = 0; r < pending; ++r) {
    const double requested = v.time - 30.0 * u(rng);
    const Stop drop{StopKind::dropoff, 100 + r, {coord(rng), coord(rng)}, 0.0, requested};
    if (u(rng) < 0.4 && v.onboard < capacity) {
      ++v.onboard;
      stops.insert(stops.begin() + static_cast<long>(u(rng) * (stops.size() + 1)), drop);
    } else {
      const Stop pick{StopKind::pickup, 100 + r, {coord(rng), coord(rng)}, 0.0, requested};
      const auto i = static_cast<std::size_t>(u(rng) * (stops.size() + 1)) % (stops.size() + 1);
      stops.insert(stops.begin() + static_cast<long>(i), pick);
      const auto j = i + 1 + static_cast<std::size_t>(u(rng) * (stops.size() - i)) % (stops.size() - i);
      stops.insert(stops.begin() + static_cast<long>(j), drop);
    }
  }
  v.tour.stops = stops;
  return v;
}

}  // namespace fixtures
