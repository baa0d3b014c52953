#include <gtest/gtest.h>

#include <sstream>

#include "mts/config.hpp"

using namespace mts;

namespace {
Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}
}  // namespace

TEST(Config, ReferenceValues) {
  const Scenario s = parse(emit_reference_config());
  EXPECT_EQ(s.fleet_size, 40);
  EXPECT_EQ(s.capacity, 10);
  EXPECT_EQ(s.network.zone_count, 16);
  EXPECT_DOUBLE_EQ(s.dispatch.relocation_interval_min, 15.0);
  EXPECT_EQ(s.dispatch.k_nearest, 4u);
  EXPECT_DOUBLE_EQ(s.pricing.alpha, 0.05);
  EXPECT_DOUBLE_EQ(s.lambda, 400.0);
  EXPECT_EQ(s.days, 20);
  EXPECT_DOUBLE_EQ(s.start_min, 420.0);
  EXPECT_DOUBLE_EQ(s.end_min, 540.0);
  EXPECT_DOUBLE_EQ(s.initial.beta_ovtt, -0.2);
  EXPECT_DOUBLE_EQ(s.initial.beta_ivtt, -0.1);
  EXPECT_DOUBLE_EQ(s.initial.beta_cost, -0.1);
  EXPECT_DOUBLE_EQ(s.truth.mu[1], 2.0);
  const std::string text = emit_reference_config();
  EXPECT_NE(text.find("alpha = 0.05\n"), std::string::npos);
  EXPECT_NE(text.find("size = 40\n"), std::string::npos);
  EXPECT_NE(text.find("start = 07:00\n"), std::string::npos);
}

TEST(Config, RoundTripIsIdempotent) {
  const std::string first = emit_reference_config();
  std::ostringstream second;
  write_config(second, parse(first));
  EXPECT_EQ(first, second.str());

  Scenario odd;
  odd.lambda = 123.456789;
  odd.wtp.sigma = 0.1;
  odd.start_min = 421.5;
  odd.pricing.mode = PricingMode::unconstrained;
  odd.enforce_wtp = true;
  std::ostringstream a, b;
  write_config(a, odd);
  write_config(b, parse(a.str()));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Config, PartialFileKeepsDefaults) {
  const Scenario s = parse("# comment\n[simulation]\nlambda_per_hour = 100  # per hour\n\n[wtp]\nsigma=4\n");
  EXPECT_DOUBLE_EQ(s.lambda, 100.0);
  EXPECT_DOUBLE_EQ(s.wtp.sigma, 4.0);
  EXPECT_EQ(s.fleet_size, 40);
}

TEST(Config, DiagnosticsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("[simulation]\nlambda_per_hour = abc\n"), 2);
  EXPECT_EQ(line_of("[simulation]\n\nnope = 1\n"), 3);
  EXPECT_EQ(line_of("[bogus]\n"), 1);
  EXPECT_EQ(line_of("lambda_per_hour = 1\n"), 1);
  EXPECT_EQ(line_of("[fleet]\nsize = 4\nsize = 5\n"), 3);
  EXPECT_EQ(line_of("[pricing]\nmode = dynamic\n"), 2);
  EXPECT_EQ(line_of("[fleet]\ncapacity\n"), 2);
  EXPECT_EQ(line_of("[simulation]\ndays = 0\n"), 0);  // semantic check, not tied to a line
  try {
    parse("[simulation]\nlambda_per_hour = abc\n");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("test.ini:2"), std::string::npos);
  }
}
