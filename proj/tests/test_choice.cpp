#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mts/choice.hpp"
#include "oracles.hpp"

using namespace mts;

namespace {

std::vector<std::vector<std::size_t>> mode_nests() { return NestStructure::modes().nests; }

ModeAttributes random_attributes(Rng& rng, bool all_available = false) {
  std::uniform_real_distribution<double> t(0.0, 120.0), c(0.0, 25.0), u(0.0, 1.0);
  ModeAttributes a{};
  for (auto& x : a) x = {t(rng) * 0.3, t(rng), c(rng), all_available || u(rng) < 0.8};
  a[0].available = true;  // keep at least one alternative
  return a;
}

// Draws choices from the true model for a fixed attribute pool.
std::vector<Observation> synthetic(const NlParams& truth, std::size_t n, unsigned seed) {
  Rng rng(seed);
  std::vector<Observation> out;
  for (std::size_t i = 0; i < n; ++i) {
    Observation o;
    o.attributes = random_attributes(rng);
    o.chosen = static_cast<Mode>(sample_choice(rng, choice_probabilities(truth, o.attributes)));
    out.push_back(o);
  }
  return out;
}

}  // namespace

TEST(Choice, ReferenceParameters) {
  const NlParams t = NlParams::reference_truth();
  EXPECT_DOUBLE_EQ(t.beta_ovtt, -0.032);
  EXPECT_DOUBLE_EQ(t.beta_ivtt, -0.023);
  EXPECT_DOUBLE_EQ(t.beta_cost, -0.074);
  EXPECT_EQ(t.mu, (std::array<double, 3>{1.0, 2.0, 2.0}));
  const NlParams g = NlParams::reference_initial_guess();
  EXPECT_DOUBLE_EQ(g.beta_ovtt, -0.2);
  // 0.168 + 0.077 + 0.026 + 0 + 1 + 1
  EXPECT_NEAR(gap(g, t), 2.271, 1e-12);
  EXPECT_DOUBLE_EQ(gap(t, t), 0.0);
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  EXPECT_THROW(gap(a, b), std::invalid_argument);
}

TEST(Choice, MatchesIndependentNestedLogit) {
  Rng rng(5);
  std::uniform_real_distribution<double> beta(-0.2, 0.0), mu(0.3, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    NlParams p;
    p.beta_ovtt = beta(rng);
    p.beta_ivtt = beta(rng);
    p.beta_cost = beta(rng);
    p.mu = {mu(rng), mu(rng), mu(rng)};
    const auto attrs = random_attributes(rng);
    const auto got = choice_probabilities(p, attrs);
    const auto v = mode_utilities(p, attrs);
    std::vector<bool> avail;
    for (const auto& a : attrs) avail.push_back(a.available);
    const auto want = oracle::nested_logit({v.begin(), v.end()}, avail, mode_nests(), {p.mu.begin(), p.mu.end()});
    for (std::size_t j = 0; j < kModeCount; ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
  }
}

TEST(Choice, UnitScalesReduceToMultinomialLogit) {
  Rng rng(9);
  NlParams p = NlParams::reference_truth();
  p.mu = {1.0, 1.0, 1.0};
  for (int trial = 0; trial < 500; ++trial) {
    const auto attrs = random_attributes(rng);
    const auto got = choice_probabilities(p, attrs);
    const auto v = mode_utilities(p, attrs);
    std::vector<bool> avail;
    for (const auto& a : attrs) avail.push_back(a.available);
    const auto want = oracle::mnl({v.begin(), v.end()}, avail);
    for (std::size_t j = 0; j < kModeCount; ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
  }
}

TEST(Choice, ExtremeUtilitiesStayFinite) {
  std::array<double, 7> v{-5000, -4000, 800, 801, -1e4, 0, 3};
  std::array<bool, 7> avail{true, true, true, true, true, true, true};
  std::array<double, 3> mu{1.0, 0.01, 5.0};
  std::array<double, 7> p{};
  nl_probabilities(v, avail, NestStructure::modes(), mu, p);
  double sum = 0.0;
  for (double x : p) {
    EXPECT_TRUE(std::isfinite(x));
    sum += x;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  std::array<double, 2> iv{1000.0, 1000.0};
  EXPECT_NEAR(inclusive_value(2.0, iv), 500.0 + std::log(2.0), 1e-9);
}

TEST(Choice, EmptyNestDropped) {
  NlParams p = NlParams::reference_truth();
  ModeAttributes a{};
  a[index(Mode::walk)] = {0, 30, 0, true};
  a[index(Mode::transit)] = {10, 10, 2.75, true};
  const auto probs = choice_probabilities(p, a);
  EXPECT_DOUBLE_EQ(probs[index(Mode::car)], 0.0);
  EXPECT_NEAR(probs[index(Mode::walk)] + probs[index(Mode::transit)], 1.0, 1e-12);
}

TEST(Choice, SampleChoiceInverseCdf) {
  const std::array<double, 3> p{0.2, 0.0, 0.8};
  EXPECT_EQ(sample_choice(0.0, p), 0u);
  EXPECT_EQ(sample_choice(0.1999, p), 0u);
  EXPECT_EQ(sample_choice(0.2, p), 2u);
  EXPECT_EQ(sample_choice(0.999999, p), 2u);
  const std::array<double, 2> bad{0.5, 0.6};
  EXPECT_THROW(sample_choice(0.1, bad), std::invalid_argument);
  const std::array<double, 2> neg{-0.1, 1.1};
  EXPECT_THROW(sample_choice(0.1, neg), std::invalid_argument);
}

TEST(Choice, SampleFrequenciesMatchProbabilities) {
  Rng rng(21);
  const std::array<double, 4> p{0.1, 0.2, 0.3, 0.4};
  std::array<int, 4> count{};
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++count[sample_choice(rng, p)];
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(count[j] / static_cast<double>(n), p[j], 4.0 * std::sqrt(p[j] * (1 - p[j]) / n));
  }
}

TEST(Choice, LogLikelihoodOfUnavailableChoiceIsMinusInfinity) {
  Observation o;
  o.attributes[0] = {0, 10, 0, true};
  o.chosen = Mode::car;
  const std::vector<Observation> obs{o};
  EXPECT_EQ(log_likelihood(NlParams::reference_truth(), obs), -std::numeric_limits<double>::infinity());
}

TEST(Choice, AnalyticGradientMatchesFiniteDifferences) {
  const NlParams truth = NlParams::reference_truth();
  const auto obs = synthetic(truth, 300, 4);
  for (bool free_asc : {false, true}) {
    const ParamLayout layout{free_asc};
    NlParams at = truth;
    at.mu = {1.3, 1.7, 2.4};
    at.beta_cost = -0.05;
    auto theta = layout.pack(at);
    if (free_asc) theta.back() = 0.3;
    std::vector<double> g(layout.size()), scratch(layout.size());
    mean_log_likelihood(layout, theta, obs, g);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double h = 1e-6;
      auto up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      const double fd = (mean_log_likelihood(layout, up, obs, scratch) -
                         mean_log_likelihood(layout, down, obs, scratch)) / (2 * h);
      EXPECT_NEAR(g[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "param " << i;
    }
  }
}

TEST(Choice, LayoutRoundTrip) {
  NlParams p = NlParams::reference_truth();
  p.asc = {0.0, 0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
  const ParamLayout layout{true};
  const auto q = layout.unpack(layout.pack(p));
  EXPECT_DOUBLE_EQ(q.beta_cost, p.beta_cost);
  for (std::size_t m = 0; m < kNestCount; ++m) EXPECT_NEAR(q.mu[m], p.mu[m], 1e-15);
  for (std::size_t k = 0; k < kModeCount; ++k) EXPECT_NEAR(q.asc[k], p.asc[k], 1e-15);
  std::vector<double> wrong(2);
  EXPECT_THROW(layout.unpack(wrong), std::invalid_argument);
}

TEST(Choice, EstimateRecoversTruthOnLargeSample) {
  const NlParams truth = NlParams::reference_truth();
  const auto obs = synthetic(truth, 20000, 8);
  const auto fit = estimate(obs, NlParams::reference_initial_guess());
  EXPECT_EQ(fit.status, EstimateStatus::converged) << fit.message;
  EXPECT_TRUE(fit.identified);
  EXPECT_LT(gap(fit.params, truth), 0.3);
  EXPECT_GE(fit.log_likelihood, log_likelihood(truth, obs));
}

TEST(Choice, EstimateFlagsNonIdentifiedModel) {
  // Every observation offers only walk and bike with identical attributes:
  // nothing identifies the taste coefficients or the other nest scales.
  std::vector<Observation> obs;
  for (int i = 0; i < 200; ++i) {
    Observation o;
    o.attributes[0] = {0, 10, 0, true};
    o.attributes[1] = {0, 10, 0, true};
    o.chosen = i % 2 ? Mode::walk : Mode::bike;
    obs.push_back(o);
  }
  const auto fit = estimate(obs, NlParams::reference_initial_guess());
  EXPECT_NE(fit.status, EstimateStatus::converged);
  EXPECT_FALSE(fit.identified);
}

TEST(Choice, EstimateRejectsImpossibleStart) {
  Observation o;
  o.attributes[0] = {0, 10, 0, true};
  o.chosen = Mode::taxi;
  const std::vector<Observation> obs{o};
  EXPECT_THROW(estimate(obs, NlParams::reference_initial_guess()), std::invalid_argument);
}

TEST(Choice, ObservationCsvRoundTrip) {
  const auto obs = synthetic(NlParams::reference_truth(), 50, 2);
  std::stringstream io;
  write_observations_csv(io, obs);
  const auto back = read_observations_csv(io);
  ASSERT_EQ(back.size(), obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_EQ(back[i].chosen, obs[i].chosen);
    for (std::size_t j = 0; j < kModeCount; ++j) {
      EXPECT_DOUBLE_EQ(back[i].attributes[j].cost, obs[i].attributes[j].cost);
      EXPECT_EQ(back[i].attributes[j].available, obs[i].attributes[j].available);
    }
  }
}
