#include "mts/pricing.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mts {

std::string_view pricing_mode_name(PricingMode mode) {
  switch (mode) {
    case PricingMode::none: return "none";
    case PricingMode::constrained: return "constrained";
    case PricingMode::unconstrained: return "unconstrained";
  }
  return "?";
}

PricingMode parse_pricing_mode(std::string_view text) {
  if (text == "none") return PricingMode::none;
  if (text == "constrained") return PricingMode::constrained;
  if (text == "unconstrained") return PricingMode::unconstrained;
  throw std::invalid_argument("unknown pricing mode '" + std::string(text) + "'");
}

double price_cap(double w, double s, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("price_cap: alpha must lie in (0,1)");
  if (s < 0.0) throw std::invalid_argument("price_cap: negative WTP std");
  if (s == 0.0) return w;
  const boost::math::normal_distribution<double> standard;
  return w + boost::math::quantile(standard, 1.0 - alpha) * s;
}

double adjusted_utility(double base_utility, double beta_cost, double delta) {
  return base_utility + beta_cost * delta;
}

namespace {

struct Box {
  std::vector<double> lo, hi;
};

void check_inputs(const Assortment& assortment, const ChoiceContext& context) {
  if (assortment.options.empty()) throw std::invalid_argument("pricing: empty assortment");
  if (assortment.options.size() > 2) throw std::invalid_argument("pricing: at most two options");
  for (const PricedOption& o : assortment.options) {
    if (!std::isfinite(o.base_utility) || !std::isfinite(o.fare) || !std::isfinite(o.op_cost)) {
      throw std::invalid_argument("pricing: non-finite option data");
    }
  }
  for (std::size_t j = 0; j < kModeCount; ++j) {
    if (context.available[j] && !std::isfinite(context.utilities[j])) {
      throw std::invalid_argument("pricing: non-finite utility in choice context");
    }
  }
}

ModeProbabilities probabilities_at(const std::vector<double>& deltas, const Assortment& assortment,
                                   const ChoiceContext& context) {
  ModeUtilities v = context.utilities;
  std::array<bool, kModeCount> avail = context.available;
  for (std::size_t i = 0; i < assortment.options.size(); ++i) {
    const PricedOption& o = assortment.options[i];
    v[index(o.mode)] = adjusted_utility(o.base_utility, context.beta_cost, deltas[i]);
    avail[index(o.mode)] = true;
  }
  ModeProbabilities p{};
  nl_probabilities(v, avail, NestStructure::modes(), context.mu, p);
  return p;
}

Box price_box(const Assortment& assortment, const PricingConfig& config, double w,
              std::vector<double>& caps) {
  Box box;
  caps.clear();
  for (const PricedOption& o : assortment.options) {
    const double cap = config.mode == PricingMode::unconstrained
                           ? config.unconstrained_price_ceiling
                           : price_cap(w, config.s, config.alpha);
    caps.push_back(cap);
    box.lo.push_back(-o.fare);
    box.hi.push_back(std::max(-o.fare, cap - o.fare));
  }
  return box;
}

std::vector<double> project(std::vector<double> x, const Box& box) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], box.lo[i], box.hi[i]);
  return x;
}

void finish(PriceSolution& sol, const Assortment& assortment, const ChoiceContext& context,
            const Box& box) {
  sol.expected_profit = expected_profit(sol.delta, assortment, context);
  sol.at_cap.assign(sol.delta.size(), false);
  sol.at_floor.assign(sol.delta.size(), false);
  for (std::size_t i = 0; i < sol.delta.size(); ++i) {
    sol.at_cap[i] = sol.delta[i] >= box.hi[i] - 1e-7;
    sol.at_floor[i] = sol.delta[i] <= box.lo[i] + 1e-7;
  }
}

struct AscentResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

AscentResult projected_ascent(std::vector<double> x, const Box& box, const Assortment& assortment,
                              const ChoiceContext& context) {
  constexpr double kStepTol = 1e-8;
  constexpr int kMaxIter = 20000;
  x = project(std::move(x), box);
  double value = expected_profit(x, assortment, context);
  double t = 1.0;
  int it = 0;
  for (; it < kMaxIter; ++it) {
    const std::vector<double> g = expected_profit_gradient(x, assortment, context);
    bool accepted = false;
    double moved = 0.0;
    while (t > 1e-14) {
      std::vector<double> trial(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + t * g[i];
      trial = project(std::move(trial), box);
      double ascent = 0.0;
      moved = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        ascent += g[i] * (trial[i] - x[i]);
        moved = std::max(moved, std::abs(trial[i] - x[i]));
      }
      if (moved == 0.0) break;  // stationary under projection
      const double trial_value = expected_profit(trial, assortment, context);
      if (trial_value >= value + 1e-4 * ascent) {
        x = std::move(trial);
        value = trial_value;
        accepted = true;
        t *= 2.0;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || moved < kStepTol) break;
  }
  return {std::move(x), value, it};
}

// Independent evaluator for the grid oracle: exponentials of each offer are
// tabulated along its grid and combined per point.
class GridEvaluator {
 public:
  GridEvaluator(const Assortment& assortment, const ChoiceContext& context)
      : assortment_(assortment), context_(context) {
    const auto& nests = NestStructure::modes();
    for (std::size_t m = 0; m < kNestCount; ++m) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t j : nests.nests[m]) {
        if (is_offered(j) || context.available[j]) top = std::max(top, base_utility(j) / context.mu[m]);
      }
      shift_[m] = top;
      fixed_[m] = 0.0;
      for (std::size_t j : nests.nests[m]) {
        if (!is_offered(j) && context.available[j]) {
          fixed_[m] += std::exp(context.utilities[j] / context.mu[m] - top);
        }
      }
    }
    for (const PricedOption& o : assortment.options) nest_of_option_.push_back(nests.nest_of(index(o.mode)));
  }

  // exp(V(delta)/mu - shift) for option i.
  double offer_term(std::size_t i, double delta) const {
    const PricedOption& o = assortment_.options[i];
    const std::size_t m = nest_of_option_[i];
    return std::exp((o.base_utility + context_.beta_cost * delta) / context_.mu[m] - shift_[m]);
  }

  double profit(const std::vector<double>& delta, const std::vector<double>& terms) const {
    std::array<double, kNestCount> sums = fixed_;
    for (std::size_t i = 0; i < terms.size(); ++i) sums[nest_of_option_[i]] += terms[i];
    std::array<double, kNestCount> weight{};
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < kNestCount; ++m) {
      weight[m] = sums[m] > 0.0 ? context_.mu[m] * (shift_[m] + std::log(sums[m]))
                                : -std::numeric_limits<double>::infinity();
      top = std::max(top, weight[m]);
    }
    double denom = 0.0;
    for (std::size_t m = 0; m < kNestCount; ++m) {
      if (sums[m] > 0.0) denom += std::exp(weight[m] - top);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::size_t m = nest_of_option_[i];
      const double p = std::exp(weight[m] - top) / denom * terms[i] / sums[m];
      const PricedOption& o = assortment_.options[i];
      total += p * (o.fare - o.op_cost + delta[i]);
    }
    return total;
  }

  double profit(const std::vector<double>& delta) const {
    std::vector<double> terms(delta.size());
    for (std::size_t i = 0; i < delta.size(); ++i) terms[i] = offer_term(i, delta[i]);
    return profit(delta, terms);
  }

 private:
  bool is_offered(std::size_t j) const {
    for (const PricedOption& o : assortment_.options) {
      if (index(o.mode) == j) return true;
    }
    return false;
  }
  double base_utility(std::size_t j) const {
    for (const PricedOption& o : assortment_.options) {
      if (index(o.mode) == j) return o.base_utility;
    }
    return context_.utilities[j];
  }

  const Assortment& assortment_;
  const ChoiceContext& context_;
  std::array<double, kNestCount> shift_{};
  std::array<double, kNestCount> fixed_{};
  std::vector<std::size_t> nest_of_option_;
};

std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> axis;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) axis.push_back(lo + static_cast<double>(i) * step);
  if (axis.back() < hi - 1e-12) axis.push_back(hi);
  return axis;
}

}  // namespace

std::vector<double> option_probabilities(const std::vector<double>& deltas, const Assortment& assortment,
                                         const ChoiceContext& context) {
  const ModeProbabilities p = probabilities_at(deltas, assortment, context);
  std::vector<double> out;
  for (const PricedOption& o : assortment.options) out.push_back(p[index(o.mode)]);
  return out;
}

double expected_profit(const std::vector<double>& deltas, const Assortment& assortment,
                       const ChoiceContext& context) {
  if (deltas.size() != assortment.options.size()) throw std::invalid_argument("expected_profit: size mismatch");
  const ModeProbabilities p = probabilities_at(deltas, assortment, context);
  double total = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const PricedOption& o = assortment.options[i];
    total += p[index(o.mode)] * (o.fare - o.op_cost + deltas[i]);
  }
  return total;
}

std::vector<double> expected_profit_gradient(const std::vector<double>& deltas,
                                             const Assortment& assortment,
                                             const ChoiceContext& context) {
  const auto& nests = NestStructure::modes();
  const ModeProbabilities p = probabilities_at(deltas, assortment, context);
  std::array<double, kNestCount> nest_p{};
  for (std::size_t m = 0; m < kNestCount; ++m) {
    for (std::size_t j : nests.nests[m]) nest_p[m] += p[j];
  }
  const std::size_t n = deltas.size();
  std::vector<double> grad(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t ak = index(assortment.options[k].mode);
    const std::size_t mk = nests.nest_of(ak);
    const double cond_k = nest_p[mk] > 0.0 ? p[ak] / nest_p[mk] : 0.0;
    grad[k] = p[ak];
    for (std::size_t j = 0; j < n; ++j) {
      const PricedOption& o = assortment.options[j];
      const std::size_t aj = index(o.mode);
      const std::size_t mj = nests.nest_of(aj);
      double dlog = -p[ak];
      if (mj == mk) dlog += (1.0 - 1.0 / context.mu[mj]) * cond_k;
      if (j == k) dlog += 1.0 / context.mu[mj];
      grad[k] += (o.fare - o.op_cost + deltas[j]) * p[aj] * dlog * context.beta_cost;
    }
  }
  return grad;
}

PriceSolution optimize(const Assortment& assortment, const ChoiceContext& context,
                       const PricingConfig& config, double w) {
  check_inputs(assortment, context);
  const std::size_t n = assortment.options.size();
  PriceSolution sol;
  if (config.mode == PricingMode::none) {
    std::vector<double> caps;
    const Box box = price_box(assortment, {config.alpha, config.s, PricingMode::constrained,
                                           config.unconstrained_price_ceiling}, w, caps);
    sol.cap = caps;
    sol.delta.assign(n, 0.0);
    sol.status = SolverStatus::fixed_prices;
    finish(sol, assortment, context, box);
    return sol;
  }
  if (config.mode == PricingMode::unconstrained && !(context.beta_cost < 0.0)) {
    throw std::invalid_argument("optimize: unconstrained pricing needs a negative cost coefficient");
  }
  const Box box = price_box(assortment, config, w, sol.cap);

  bool empty = false;
  for (std::size_t i = 0; i < n; ++i) empty = empty || sol.cap[i] < 0.0;

  // Start points: no adjustment, both box corners, the centre and a mixed
  // corner. The upper end is limited for the unconstrained box so that no
  // start sits on the flat tail where every choice probability vanishes.
  std::vector<double> reach(n);
  for (std::size_t i = 0; i < n; ++i) {
    double hi = box.hi[i];
    if (config.mode == PricingMode::unconstrained) {
      const double scale = 3.0 * (*std::max_element(context.mu.begin(), context.mu.end())) /
                           std::abs(context.beta_cost);
      hi = std::min(hi, box.lo[i] + assortment.options[i].fare + scale);
    }
    reach[i] = hi;
  }
  std::vector<std::vector<double>> starts;
  starts.push_back(std::vector<double>(n, 0.0));
  starts.push_back(box.lo);
  starts.push_back(reach);
  std::vector<double> mid(n), mixed(n);
  for (std::size_t i = 0; i < n; ++i) {
    mid[i] = 0.5 * (box.lo[i] + reach[i]);
    mixed[i] = (i % 2 == 0) ? reach[i] : box.lo[i];
  }
  starts.push_back(mid);
  starts.push_back(n > 1 ? mixed : std::vector<double>{0.25 * box.lo[0] + 0.75 * reach[0]});

  AscentResult best;
  bool have = false;
  int iterations = 0;
  for (const auto& s : starts) {
    AscentResult r = projected_ascent(s, box, assortment, context);
    iterations += r.iterations;
    if (!have || r.value > best.value) {
      best = std::move(r);
      have = true;
    }
  }
  sol.delta = best.x;
  sol.iterations = iterations;
  sol.status = empty ? SolverStatus::empty_box : SolverStatus::optimal;
  finish(sol, assortment, context, box);
  return sol;
}

PriceSolution brute_force_optimize(const Assortment& assortment, const ChoiceContext& context,
                                   const PricingConfig& config, double w) {
  check_inputs(assortment, context);
  const std::size_t n = assortment.options.size();
  PriceSolution sol;
  if (config.mode == PricingMode::none) return optimize(assortment, context, config, w);
  if (config.mode == PricingMode::unconstrained && !(context.beta_cost < 0.0)) {
    throw std::invalid_argument("brute_force_optimize: unconstrained pricing needs a negative cost coefficient");
  }
  const Box box = price_box(assortment, config, w, sol.cap);
  const GridEvaluator eval(assortment, context);

  constexpr double kCoarse = 0.01;
  constexpr double kFine = 0.0001;
  constexpr double kMaxPointsPerAxis = 4000.0;
  double step = kCoarse;
  for (std::size_t i = 0; i < n; ++i) step = std::max(step, (box.hi[i] - box.lo[i]) / kMaxPointsPerAxis);

  std::vector<std::vector<double>> axes;
  std::vector<std::vector<double>> terms;
  for (std::size_t i = 0; i < n; ++i) {
    axes.push_back(grid_axis(box.lo[i], box.hi[i], step));
    std::vector<double> t;
    for (double d : axes[i]) t.push_back(eval.offer_term(i, d));
    terms.push_back(std::move(t));
  }

  std::vector<double> best_x(n), x(n), tx(n);
  double best = -std::numeric_limits<double>::infinity();
  if (n == 1) {
    for (std::size_t a = 0; a < axes[0].size(); ++a) {
      x[0] = axes[0][a];
      tx[0] = terms[0][a];
      const double v = eval.profit(x, tx);
      if (v > best) best = v, best_x = x;
    }
  } else {
    for (std::size_t a = 0; a < axes[0].size(); ++a) {
      x[0] = axes[0][a];
      tx[0] = terms[0][a];
      for (std::size_t b = 0; b < axes[1].size(); ++b) {
        x[1] = axes[1][b];
        tx[1] = terms[1][b];
        const double v = eval.profit(x, tx);
        if (v > best) best = v, best_x = x;
      }
    }
  }

  // Refine on successively finer local grids around the incumbent.
  while (step > kFine * (1.0 + 1e-9)) {
    const double fine = std::max(kFine, step / 10.0);
    std::vector<std::vector<double>> local;
    for (std::size_t i = 0; i < n; ++i) {
      local.push_back(grid_axis(std::max(box.lo[i], best_x[i] - step), std::min(box.hi[i], best_x[i] + step), fine));
    }
    if (n == 1) {
      for (double a : local[0]) {
        x[0] = a;
        const double v = eval.profit(x);
        if (v > best) best = v, best_x = x;
      }
    } else {
      for (double a : local[0]) {
        for (double b : local[1]) {
          x[0] = a;
          x[1] = b;
          const double v = eval.profit(x);
          if (v > best) best = v, best_x = x;
        }
      }
    }
    step = fine;
  }

  sol.delta = best_x;
  sol.status = SolverStatus::optimal;
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.cap[i] < 0.0) sol.status = SolverStatus::empty_box;
  }
  finish(sol, assortment, context, box);
  return sol;
}

}  // namespace mts
