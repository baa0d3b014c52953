#include "mts/sim.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace mts {

void Scenario::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("scenario: lambda must be positive");
  if (days < 1) throw std::invalid_argument("scenario: days must be at least 1");
  if (fleet_size < 0) throw std::invalid_argument("scenario: negative fleet size");
  if (capacity < 1) throw std::invalid_argument("scenario: capacity must be at least 1");
  if (!(end_min >= start_min)) throw std::invalid_argument("scenario: horizon end precedes start");
  if (wtp.sigma < 0.0) throw std::invalid_argument("scenario: sigma must be non-negative");
  if (!(pricing.alpha > 0.0 && pricing.alpha < 1.0)) throw std::invalid_argument("scenario: alpha must lie in (0,1)");
  dispatch.validate();
  truth.validate();
  initial.validate();
}

PricingConfig Scenario::effective_pricing(PricingMode mode) const {
  PricingConfig p = pricing;
  p.mode = mode;
  p.s = wtp.s();
  return p;
}

namespace {

Rng stream(unsigned long long seed, int day, unsigned purpose) {
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffULL), static_cast<unsigned>(seed >> 32),
                    static_cast<unsigned>(day), purpose};
  return Rng(seq);
}

constexpr unsigned kDemandStream = 1;
constexpr unsigned kChoiceStream = 2;

}  // namespace

DayMetrics run_day(const Scenario& scenario, const Network& network, int day, PricingMode mode,
                   const NlParams& estimate, DayLog* log) {
  scenario.validate();
  const auto wall_start = std::chrono::steady_clock::now();

  Rng demand_rng = stream(scenario.seed, day, kDemandStream);
  Rng choice_rng = stream(scenario.seed, day, kChoiceStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Request> requests = generate_day(demand_rng, scenario.lambda, scenario.start_min,
                                               scenario.end_min, scenario.network.region_size_km);
  for (Request& r : requests) r.wtp = sample_wtp(demand_rng, r, scenario.wtp);

  const PricingConfig pricing = scenario.effective_pricing(mode);
  Fleet fleet(network.depots(), scenario.fleet_size, scenario.capacity, scenario.dispatch, scenario.start_min);

  DayMetrics metrics;
  metrics.day = day;
  metrics.pricing = mode;
  metrics.n_requests = static_cast<int>(requests.size());

  std::vector<PassengerRecord> passengers;
  std::unordered_map<int, std::size_t> passenger_of;
  std::vector<FleetEvent> all_events;
  auto record_events = [&](std::vector<FleetEvent> events) {
    for (const FleetEvent& e : events) {
      if (e.kind == EventKind::pickup || e.kind == EventKind::dropoff) {
        PassengerRecord& p = passengers.at(passenger_of.at(e.request));
        (e.kind == EventKind::pickup ? p.pickup_time : p.dropoff_time) = e.time;
      }
    }
    if (log) all_events.insert(all_events.end(), events.begin(), events.end());
  };

  std::vector<int> zone_demand(network.zones().size(), 0);
  double next_epoch = scenario.start_min + scenario.dispatch.relocation_interval_min;
  double quoted_price_sum = 0.0;
  int quotes = 0;

  for (const Request& r : requests) {
    while (next_epoch <= r.desired_pickup) {
      record_events(fleet.advance(next_epoch));
      const auto moves = relocate_idle(fleet.vehicles(), network, zone_demand);
      fleet.apply(moves);
      std::fill(zone_demand.begin(), zone_demand.end(), 0);
      next_epoch += scenario.dispatch.relocation_interval_min;
    }
    record_events(fleet.advance(r.desired_pickup));
    ++zone_demand[static_cast<std::size_t>(network.zone_of(r.origin))];

    ModeAttributes attrs = outside_mode_attributes(r, network, scenario.fares, scenario.speeds,
                                                   scenario.dispatch.k_nearest);
    std::vector<Offer> offers;
    if (auto o = generate_offer_R(r, fleet.vehicles(), scenario.dispatch, scenario.fares)) {
      offers.push_back(std::move(*o));
    }
    if (auto o = generate_offer_RT(r, fleet.vehicles(), network, scenario.dispatch, scenario.fares,
                                   scenario.speeds)) {
      offers.push_back(std::move(*o));
    }

    std::vector<double> deltas(offers.size(), 0.0);
    std::vector<double> caps(offers.size(), 0.0);
    if (!offers.empty()) {
      Assortment assortment;
      ChoiceContext context;
      context.utilities = mode_utilities(estimate, attrs);
      for (std::size_t j = 0; j < kModeCount; ++j) context.available[j] = attrs[j].available;
      context.mu = estimate.mu;
      context.beta_cost = estimate.beta_cost;
      for (const Offer& o : offers) {
        assortment.options.push_back(
            {o.kind, o.fare, o.op_cost, systematic_utility(estimate, o.kind, {o.ovtt, o.ivtt, o.fare, true})});
      }
      const PriceSolution sol = optimize(assortment, context, pricing, scenario.wtp.reference_cost(r));
      deltas = sol.delta;
      caps = sol.cap;
    }
    for (std::size_t i = 0; i < offers.size(); ++i) {
      const Offer& o = offers[i];
      const double price = o.fare + deltas[i];
      attrs[index(o.kind)] = {o.ovtt, o.ivtt, price, true};
      (o.kind == Mode::rideshare ? metrics.price_r : metrics.price_rt).push_back(price);
      (o.kind == Mode::rideshare ? metrics.offers_r : metrics.offers_rt) += 1;
      quoted_price_sum += price;
      ++quotes;
      if (price > r.wtp) ++metrics.price_above_wtp;
    }

    ModeAttributes customer_view = attrs;
    if (scenario.enforce_wtp) {
      for (const Offer& o : offers) {
        if (attrs[index(o.kind)].cost > r.wtp) customer_view[index(o.kind)].available = false;
      }
    }
    const double u = unit(choice_rng);
    const ModeProbabilities probs = choice_probabilities(scenario.truth, customer_view);
    const auto chosen = static_cast<Mode>(sample_choice(u, probs));
    ++metrics.mode_count[index(chosen)];

    for (std::size_t i = 0; i < offers.size(); ++i) {
      const Offer& o = offers[i];
      const bool taken = o.kind == chosen;
      if (taken) {
        fleet.commit(o.vehicle, o.tour);
        const double price = o.fare + deltas[i];
        metrics.revenue += price;
        metrics.op_cost += o.op_cost;
        metrics.profit += price - o.op_cost;
        PassengerRecord p;
        p.request = r.id;
        p.mode = o.kind;
        p.vehicle = o.vehicle;
        p.request_time = r.desired_pickup;
        p.onward_time = o.onward_time();
        p.ivtt = o.itinerary ? o.itinerary->in_vehicle_time : 0.0;
        passenger_of[r.id] = passengers.size();
        passengers.push_back(p);
      }
      if (log) {
        log->pricing.push_back({day, r.id, o.kind, o.fare, o.op_cost, deltas[i], caps[i], r.wtp, taken});
      }
    }
    if (log) log->observations.push_back({customer_view, chosen});
  }
  record_events(fleet.finish_day());

  metrics.n_served = static_cast<int>(passengers.size());
  if (metrics.n_requests > 0) {
    for (std::size_t j = 0; j < kModeCount; ++j) {
      metrics.mode_share[j] = static_cast<double>(metrics.mode_count[j]) / metrics.n_requests;
    }
  }
  double wt = 0.0, jt = 0.0;
  for (PassengerRecord& p : passengers) {
    p.ivtt += p.dropoff_time - p.pickup_time;
    wt += p.waiting_time();
    jt += p.journey_time();
  }
  if (!passengers.empty()) {
    metrics.wt = wt / static_cast<double>(passengers.size());
    metrics.jt = jt / static_cast<double>(passengers.size());
  }
  double travel = 0.0;
  for (const VehicleState& v : fleet.vehicles()) travel += v.travel_minutes;
  if (scenario.fleet_size > 0) metrics.vtl = travel / scenario.fleet_size;
  if (quotes > 0) metrics.mean_price = quoted_price_sum / quotes;
  metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

  if (log) {
    log->requests = std::move(requests);
    log->events = std::move(all_events);
    log->passengers = std::move(passengers);
  }
  return metrics;
}

SummaryStat summarize(const std::vector<double>& values) {
  SummaryStat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::vector<double> ExperimentReport::gap_series() const {
  std::vector<double> out;
  for (const DayMetrics& d : days) out.push_back(d.gap);
  return out;
}

SummaryStat ExperimentReport::stat(double DayMetrics::*field) const {
  std::vector<double> v;
  for (const DayMetrics& d : days) v.push_back(d.*field);
  return summarize(v);
}

SummaryStat ExperimentReport::mode_share_stat(Mode m) const {
  std::vector<double> v;
  for (const DayMetrics& d : days) v.push_back(d.mode_share[index(m)]);
  return summarize(v);
}

SummaryStat ExperimentReport::mod_share_stat() const {
  std::vector<double> v;
  for (const DayMetrics& d : days) v.push_back(d.mod_share());
  return summarize(v);
}

SummaryStat ExperimentReport::price_stat() const {
  std::vector<double> v;
  for (const DayMetrics& d : days) v.push_back(d.mean_price);
  return summarize(v);
}

ExperimentReport run_experiment(const Scenario& scenario, const ExperimentOptions& options) {
  const Network network = Network::build(scenario.network);
  return run_experiment(scenario, network, options);
}

ExperimentReport run_experiment(const Scenario& scenario, const Network& network,
                                const ExperimentOptions& options) {
  scenario.validate();
  ExperimentReport report;
  report.lambda = scenario.lambda;
  report.capacity = scenario.capacity;
  report.sigma = scenario.wtp.sigma;
  report.pricing = scenario.pricing.mode;
  report.seed = scenario.seed;

  EstimateOptions est_options;
  est_options.free_asc = scenario.estimate_asc;

  NlParams current = scenario.initial;
  std::vector<Observation> history;
  for (int day = 1; day <= scenario.days; ++day) {
    PricingMode mode = day == 1 ? PricingMode::none : scenario.pricing.mode;
    if (mode != PricingMode::none && !(current.beta_cost < 0.0)) {
      // A model in which higher prices attract customers cannot be priced against.
      report.warnings.push_back("day " + std::to_string(day) +
                                ": estimated cost coefficient is not negative; base fares used");
      mode = PricingMode::none;
    }
    DayLog log;
    DayMetrics m = run_day(scenario, network, day, mode, current, &log);
    m.gap = gap(current, scenario.truth);
    report.estimates.push_back(current);
    report.days.push_back(std::move(m));
    history.insert(history.end(), log.observations.begin(), log.observations.end());
    if (options.keep_logs) {
      report.pricing_log.insert(report.pricing_log.end(), log.pricing.begin(), log.pricing.end());
      report.observations.insert(report.observations.end(), log.observations.begin(), log.observations.end());
    }
    if (options.keep_events) {
      for (const FleetEvent& e : log.events) report.events.emplace_back(day, e);
    }

    try {
      // Later fits warm-start from the previous estimate, so one start suffices.
      est_options.starts = day == 1 ? EstimateOptions{}.starts : 1;
      const EstimateResult fit = estimate(history, current, est_options);
      if (fit.status == EstimateStatus::failed) {
        report.warnings.push_back("day " + std::to_string(day) + ": estimation failed (" + fit.message +
                                  "); keeping previous estimate");
      } else {
        if (fit.status == EstimateStatus::converged_with_warning) {
          report.warnings.push_back("day " + std::to_string(day) + ": " + fit.message);
        }
        current = fit.params;
      }
    } catch (const std::exception& e) {
      report.warnings.push_back("day " + std::to_string(day) + ": estimation error (" + e.what() +
                                "); keeping previous estimate");
    }
  }
  report.estimates.push_back(current);
  return report;
}

std::vector<ExperimentReport> compare_modes(const Scenario& scenario, const std::vector<PricingMode>& modes,
                                            const ExperimentOptions& options) {
  const Network network = Network::build(scenario.network);
  std::vector<ExperimentReport> out;
  for (PricingMode mode : modes) {
    Scenario s = scenario;
    s.pricing.mode = mode;
    out.push_back(run_experiment(s, network, options));
  }
  return out;
}

double delta_percent(double value, double base) {
  if (base == 0.0) return 0.0;
  return (value - base) / std::abs(base) * 100.0;
}

}  // namespace mts
