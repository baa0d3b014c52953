#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "mts/sim.hpp"

using namespace mts;

namespace {

Scenario small() {
  Scenario s;
  s.lambda = 60.0;
  s.days = 3;
  s.fleet_size = 10;
  s.end_min = 480.0;
  s.seed = 42;
  return s;
}

const Network& reference_network() {
  static const Network net = Network::build(NetworkConfig{});
  return net;
}

}  // namespace

TEST(Sim, ScenarioValidation) {
  Scenario s = small();
  EXPECT_NO_THROW(s.validate());
  s.days = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = small();
  s.capacity = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = small();
  s.pricing.alpha = 1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Sim, DayIsDeterministic) {
  const Scenario s = small();
  const auto a = run_day(s, reference_network(), 1, PricingMode::none, s.initial);
  const auto b = run_day(s, reference_network(), 1, PricingMode::none, s.initial);
  EXPECT_EQ(a.profit, b.profit);
  EXPECT_EQ(a.mode_count, b.mode_count);
  EXPECT_EQ(a.wt, b.wt);
  EXPECT_EQ(a.vtl, b.vtl);
}

TEST(Sim, NoFleetMeansOutsideModesOnly) {
  Scenario s = small();
  s.fleet_size = 0;
  const auto m = run_day(s, reference_network(), 1, PricingMode::constrained, s.truth);
  EXPECT_GT(m.n_requests, 0);
  EXPECT_DOUBLE_EQ(m.mod_share(), 0.0);
  EXPECT_DOUBLE_EQ(m.profit, 0.0);
  EXPECT_EQ(m.offers_r + m.offers_rt, 0);
}

TEST(Sim, DayInvariantsAndProfitIdentity) {
  Scenario s = small();
  s.wtp.sigma = 1.0;
  DayLog log;
  const auto m = run_day(s, reference_network(), 2, PricingMode::constrained, s.truth, &log);
  EXPECT_NEAR(std::accumulate(m.mode_share.begin(), m.mode_share.end(), 0.0), 1.0, 1e-12);
  double profit = 0.0;
  for (const PricingLogRow& row : log.pricing) {
    if (row.chosen) profit += row.fare + row.delta - row.op_cost;
    EXPECT_LE(row.fare + row.delta, row.cap + 1e-9);
    EXPECT_GE(row.fare + row.delta, -1e-12);
  }
  EXPECT_NEAR(profit, m.profit, 1e-9);
  EXPECT_EQ(log.observations.size(), static_cast<std::size_t>(m.n_requests));
  EXPECT_EQ(log.passengers.size(), static_cast<std::size_t>(m.n_served));
  for (const PassengerRecord& p : log.passengers) {
    EXPECT_GE(p.waiting_time(), 0.0);
    EXPECT_LE(p.waiting_time(), p.journey_time());
    EXPECT_GE(p.journey_time(), p.ivtt - 1e-9);
  }
  EXPECT_GE(m.vtl, 0.0);
  // Every served passenger is picked up once, dropped once, in that order,
  // and no vehicle ever carries more than its capacity.
  std::map<int, int> load;
  std::map<int, int> state;
  for (const FleetEvent& e : log.events) {
    if (e.kind == EventKind::pickup) {
      EXPECT_EQ(state[e.request], 0);
      state[e.request] = 1;
      EXPECT_LE(++load[e.vehicle], s.capacity);
    } else if (e.kind == EventKind::dropoff) {
      EXPECT_EQ(state[e.request], 1);
      state[e.request] = 2;
      --load[e.vehicle];
    }
  }
  for (const auto& [req, st] : state) EXPECT_EQ(st, 2) << req;
  EXPECT_EQ(state.size(), log.passengers.size());
}

TEST(Sim, RequestStreamIndependentOfPricingMode) {
  const Scenario s = small();
  DayLog a, b;
  run_day(s, reference_network(), 3, PricingMode::none, s.truth, &a);
  run_day(s, reference_network(), 3, PricingMode::unconstrained, s.truth, &b);
  ASSERT_EQ(a.requests.size(), b.requests.size());
  for (std::size_t i = 0; i < a.requests.size(); ++i) {
    EXPECT_EQ(a.requests[i].origin, b.requests[i].origin);
    EXPECT_EQ(a.requests[i].desired_pickup, b.requests[i].desired_pickup);
    EXPECT_EQ(a.requests[i].wtp, b.requests[i].wtp);
  }
}

TEST(Sim, ExperimentStructure) {
  const Scenario s = small();
  const auto rep = run_experiment(s);
  ASSERT_EQ(rep.days.size(), 3u);
  ASSERT_EQ(rep.estimates.size(), 4u);
  EXPECT_EQ(rep.days[0].pricing, PricingMode::none);
  EXPECT_NEAR(rep.days[0].gap, 2.271, 1e-12);
  for (std::size_t d = 0; d < rep.days.size(); ++d) {
    EXPECT_DOUBLE_EQ(rep.days[d].gap, gap(rep.estimates[d], s.truth));
  }
  const auto again = run_experiment(s);
  for (std::size_t d = 0; d < rep.days.size(); ++d) {
    EXPECT_EQ(rep.days[d].profit, again.days[d].profit);
    EXPECT_EQ(rep.days[d].gap, again.days[d].gap);
  }
  // Summary statistics are recomputable from the day rows.
  std::vector<double> profits;
  for (const auto& d : rep.days) profits.push_back(d.profit);
  EXPECT_DOUBLE_EQ(rep.stat(&DayMetrics::profit).mean, summarize(profits).mean);
}

TEST(Sim, SingleDayExperimentIsWarmUpOnly) {
  Scenario s = small();
  s.days = 1;
  const auto rep = run_experiment(s);
  ASSERT_EQ(rep.days.size(), 1u);
  const auto day = run_day(s, reference_network(), 1, PricingMode::none, s.initial);
  EXPECT_EQ(rep.days[0].profit, day.profit);
  EXPECT_EQ(rep.days[0].mode_count, day.mode_count);
}

TEST(Sim, IdenticalModesGiveZeroDelta) {
  Scenario s = small();
  s.days = 2;
  const auto reps = compare_modes(s, {PricingMode::constrained, PricingMode::constrained});
  ASSERT_EQ(reps.size(), 2u);
  const double a = reps[0].stat(&DayMetrics::profit).mean, b = reps[1].stat(&DayMetrics::profit).mean;
  EXPECT_EQ(delta_percent(b, a), 0.0);
  EXPECT_EQ(delta_percent(5.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(delta_percent(110.0, 100.0), 10.0);
}

TEST(Sim, SummaryStatistics) {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(summarize({}).mean, 0.0);
  EXPECT_EQ(summarize({7.0}).sd, 0.0);
}
