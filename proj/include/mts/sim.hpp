#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "mts/choice.hpp"
#include "mts/demand.hpp"
#include "mts/dispatch.hpp"
#include "mts/network.hpp"
#include "mts/pricing.hpp"

namespace mts {

struct Scenario {
  NetworkConfig network;
  FareSchedule fares;
  ModeSpeeds speeds;
  WtpModel wtp;
  DispatchConfig dispatch;
  PricingConfig pricing;  // pricing.s is derived from wtp.sigma
  double lambda = 400.0;  // customers per hour
  int days = 20;
  int fleet_size = 40;
  int capacity = 10;
  double start_min = 420.0;  // 07:00
  double end_min = 540.0;    // 09:00
  NlParams truth = NlParams::reference_truth();
  NlParams initial = NlParams::reference_initial_guess();
  bool estimate_asc = false;
  /// Customers never choose a MOD option priced above their sampled WTP.
  bool enforce_wtp = false;
  unsigned long long seed = 1;

  void validate() const;
  PricingConfig effective_pricing(PricingMode mode) const;
};

struct PricingLogRow {
  int day = 0;
  int request = 0;
  Mode option = Mode::rideshare;
  double fare = 0.0;
  double op_cost = 0.0;
  double delta = 0.0;
  double cap = 0.0;
  double wtp = 0.0;
  bool chosen = false;
};

struct PassengerRecord {
  int request = 0;
  Mode mode = Mode::rideshare;
  int vehicle = -1;
  double request_time = 0.0;
  double pickup_time = -1.0;
  double dropoff_time = -1.0;  // vehicle drop-off
  double onward_time = 0.0;    // transit + egress after the vehicle drop-off (RT)
  double ivtt = 0.0;           // realized in-vehicle time including transit

  double waiting_time() const { return pickup_time - request_time; }
  double journey_time() const { return dropoff_time - request_time + onward_time; }
};

/// Optional detailed output of one simulated day.
struct DayLog {
  std::vector<Request> requests;
  std::vector<PricingLogRow> pricing;
  std::vector<Observation> observations;
  std::vector<FleetEvent> events;
  std::vector<PassengerRecord> passengers;
};

struct DayMetrics {
  int day = 0;
  PricingMode pricing = PricingMode::none;
  int n_requests = 0;
  int n_served = 0;
  std::array<int, kModeCount> mode_count{};
  std::array<double, kModeCount> mode_share{};
  double profit = 0.0;
  double revenue = 0.0;
  double op_cost = 0.0;
  double wt = 0.0;   // mean passenger waiting time, min
  double jt = 0.0;   // mean passenger journey time, min
  double vtl = 0.0;  // total vehicle travel minutes per vehicle
  double gap = 0.0;  // gap of the estimate used for pricing that day
  int offers_r = 0;
  int offers_rt = 0;
  std::vector<double> price_r;   // quoted final prices
  std::vector<double> price_rt;
  double mean_price = 0.0;       // over all quotes
  int price_above_wtp = 0;
  double wall_seconds = 0.0;

  double mod_share() const {
    return mode_share[index(Mode::rideshare)] + mode_share[index(Mode::rideshare_transit)];
  }
};

/// Simulate one day. `mode` selects pricing and `estimate` is the operator's
/// current choice model; customers decide with scenario.truth.
DayMetrics run_day(const Scenario& scenario, const Network& network, int day, PricingMode mode,
                   const NlParams& estimate, DayLog* log = nullptr);

struct SummaryStat {
  double mean = 0.0;
  double sd = 0.0;
};
SummaryStat summarize(const std::vector<double>& values);

struct ExperimentReport {
  double lambda = 0.0;
  int capacity = 0;
  double sigma = 0.0;
  PricingMode pricing = PricingMode::none;
  unsigned long long seed = 0;
  std::vector<DayMetrics> days;
  std::vector<NlParams> estimates;  // estimate in use on each day, then the final one
  std::vector<std::string> warnings;
  std::vector<PricingLogRow> pricing_log;
  std::vector<Observation> observations;
  std::vector<std::pair<int, FleetEvent>> events;  // (day, event)

  std::vector<double> gap_series() const;
  SummaryStat stat(double DayMetrics::*field) const;
  SummaryStat mode_share_stat(Mode m) const;
  SummaryStat mod_share_stat() const;
  SummaryStat price_stat() const;  // mean/sd of the daily mean quoted price
};

struct ExperimentOptions {
  bool keep_logs = false;    // retain pricing log and observations in the report
  bool keep_events = false;  // retain the fleet event log
};

/// Day 1 runs without pricing on the initial guess; after every day the
/// model is re-estimated on all observations so far.
ExperimentReport run_experiment(const Scenario& scenario, const ExperimentOptions& options = {});
ExperimentReport run_experiment(const Scenario& scenario, const Network& network,
                                const ExperimentOptions& options = {});

/// Runs each pricing mode on identical request streams (same seed).
std::vector<ExperimentReport> compare_modes(const Scenario& scenario, const std::vector<PricingMode>& modes,
                                            const ExperimentOptions& options = {});

/// Relative change in percent, (value - base) / base * 100; 0 when base is 0.
double delta_percent(double value, double base);

}  // namespace mts
