#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "mts/choice.hpp"

namespace mts {

enum class PricingMode { none, constrained, unconstrained };

std::string_view pricing_mode_name(PricingMode mode);
PricingMode parse_pricing_mode(std::string_view text);

struct PricingConfig {
  double alpha = 0.05;
  double s = 0.0;  // std of the WTP noise, $
  PricingMode mode = PricingMode::constrained;
  /// Upper price bound used when the WTP cap is dropped.
  double unconstrained_price_ceiling = 200.0;
};

/// One operator option (rideshare or rideshare+transit) at its base fare.
struct PricedOption {
  Mode mode = Mode::rideshare;
  double fare = 0.0;
  double op_cost = 0.0;
  double base_utility = 0.0;  // systematic utility at the base fare
};

struct Assortment {
  std::vector<PricedOption> options;  // one or two entries
};

/// The full multimodal choice set as seen by the operator: utilities of the
/// outside alternatives (slots of the offered modes are overwritten from the
/// assortment), availability, and the nest scales.
struct ChoiceContext {
  ModeUtilities utilities{};
  std::array<bool, kModeCount> available{};
  std::array<double, kNestCount> mu{1.0, 1.0, 1.0};
  double beta_cost = 0.0;
};

enum class SolverStatus { optimal, fixed_prices, empty_box };

struct PriceSolution {
  std::vector<double> delta;
  std::vector<double> cap;  // upper price bound per option (ceiling when unconstrained)
  double expected_profit = 0.0;
  std::vector<bool> at_cap;
  std::vector<bool> at_floor;
  SolverStatus status = SolverStatus::optimal;
  int iterations = 0;
};

/// w + Z_{1-alpha} s.
double price_cap(double w, double s, double alpha);

double adjusted_utility(double base_utility, double beta_cost, double delta);

/// Probability of each assortment option after applying `deltas`.
std::vector<double> option_probabilities(const std::vector<double>& deltas, const Assortment& assortment,
                                         const ChoiceContext& context);

double expected_profit(const std::vector<double>& deltas, const Assortment& assortment,
                       const ChoiceContext& context);

/// Gradient of expected_profit with respect to the deltas.
std::vector<double> expected_profit_gradient(const std::vector<double>& deltas,
                                             const Assortment& assortment,
                                             const ChoiceContext& context);

/// Chance-constrained (or unconstrained) profit-maximising fare adjustments
/// by multi-start projected gradient ascent over the price box.
PriceSolution optimize(const Assortment& assortment, const ChoiceContext& context,
                       const PricingConfig& config, double w);

/// Exhaustive grid search (0.01 $) with local refinement down to 0.0001 $.
PriceSolution brute_force_optimize(const Assortment& assortment, const ChoiceContext& context,
                                   const PricingConfig& config, double w);

}  // namespace mts
