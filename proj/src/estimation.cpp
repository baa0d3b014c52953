#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "mts/choice.hpp"

namespace mts {

namespace {

constexpr std::size_t kTaste = 3;

std::array<double, kTaste> taste_attributes(const AltAttributes& a) { return {a.ovtt, a.ivtt, a.cost}; }

// ln P(chosen) and its gradient with respect to the packed parameters, for
// one observation. Returns -inf if the chosen alternative is unavailable.
double observation_score(const ParamLayout& layout, const NlParams& params,
                         const Observation& obs, std::span<double> grad) {
  const NestStructure& nests = NestStructure::modes();
  const ModeUtilities v = mode_utilities(params, obs.attributes);
  const std::size_t chosen = index(obs.chosen);
  if (!obs.attributes[chosen].available) return -std::numeric_limits<double>::infinity();

  std::array<double, kModeCount> cond{};      // P(j | nest)
  std::array<double, kNestCount> inclusive{};  // I_m
  std::array<double, kNestCount> mean_v{};     // sum_j P(j|m) V_j
  std::array<bool, kNestCount> present{};
  std::array<double, kNestCount> weight{};
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < kNestCount; ++m) {
    const double mu = params.mu[m];
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t j : nests.nests[m]) {
      if (obs.attributes[j].available) s = std::max(s, v[j] / mu);
    }
    if (s == -std::numeric_limits<double>::infinity()) continue;
    double sum = 0.0;
    for (std::size_t j : nests.nests[m]) {
      if (obs.attributes[j].available) sum += std::exp(v[j] / mu - s);
    }
    present[m] = true;
    inclusive[m] = s + std::log(sum);
    for (std::size_t j : nests.nests[m]) {
      if (!obs.attributes[j].available) continue;
      cond[j] = std::exp(v[j] / mu - inclusive[m]);
      mean_v[m] += cond[j] * v[j];
    }
    weight[m] = mu * inclusive[m];
    top = std::max(top, weight[m]);
  }
  double total = 0.0;
  for (std::size_t m = 0; m < kNestCount; ++m) {
    if (present[m]) total += std::exp(weight[m] - top);
  }
  const double log_total = top + std::log(total);
  std::array<double, kNestCount> nest_p{};
  for (std::size_t m = 0; m < kNestCount; ++m) {
    if (present[m]) nest_p[m] = std::exp(weight[m] - log_total);
  }

  const std::size_t cm = nests.nest_of(chosen);
  const double mu_c = params.mu[cm];
  const double log_p = v[chosen] / mu_c - inclusive[cm] + weight[cm] - log_total;

  // d ln P / d V_k = [k == chosen]/mu_c + [k in chosen nest](1 - 1/mu_c) P(k|c) - P_k
  std::array<double, kModeCount> dv{};
  for (std::size_t m = 0; m < kNestCount; ++m) {
    if (!present[m]) continue;
    for (std::size_t k : nests.nests[m]) {
      if (!obs.attributes[k].available) continue;
      double d = -nest_p[m] * cond[k];
      if (m == cm) d += (1.0 - 1.0 / mu_c) * cond[k];
      if (k == chosen) d += 1.0 / mu_c;
      dv[k] = d;
    }
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t k = 0; k < kModeCount; ++k) {
    if (!obs.attributes[k].available) continue;
    const auto x = taste_attributes(obs.attributes[k]);
    for (std::size_t t = 0; t < kTaste; ++t) grad[t] += dv[k] * x[t];
  }
  for (std::size_t m = 0; m < kNestCount; ++m) {
    if (!present[m]) continue;
    const double mu = params.mu[m];
    const double d_weight = inclusive[m] - mean_v[m] / mu;  // d(mu I)/d mu
    double d = -nest_p[m] * d_weight;
    if (m == cm) {
      d += -v[chosen] / (mu * mu) + inclusive[m] - (mu - 1.0) * mean_v[m] / (mu * mu);
    }
    grad[kTaste + m] = d * mu;  // chain rule through ln(mu)
  }
  if (layout.free_asc) {
    for (std::size_t k = 1; k < kModeCount; ++k) grad[kTaste + kNestCount + k - 1] = dv[k];
  }
  return log_p;
}

struct Objective {
  const ParamLayout& layout;
  std::span<const Observation> observations;

  // Negative mean log-likelihood; +inf when undefined.
  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    grad.resize(theta.size());
    std::vector<double> g(theta.size());
    const double ll = mean_log_likelihood(layout, {theta.data(), static_cast<std::size_t>(theta.size())},
                                          observations, g);
    for (Eigen::Index i = 0; i < theta.size(); ++i) grad[i] = -g[static_cast<std::size_t>(i)];
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  }
};

struct BfgsOutcome {
  Eigen::VectorXd theta;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

BfgsOutcome bfgs(const Objective& f, Eigen::VectorXd theta, int max_iterations, double tol) {
  const Eigen::Index n = theta.size();
  Eigen::VectorXd grad;
  double value = f(theta, grad);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  BfgsOutcome out;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (grad.norm() < tol) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = -h_inv * grad;
    double slope = grad.dot(dir);
    if (slope >= 0.0) {
      h_inv.setIdentity();
      dir = -grad;
      slope = grad.dot(dir);
    }
    // Backtracking Armijo line search; cap the step to keep ln(mu) sane.
    double step = 1.0;
    const double max_move = dir.cwiseAbs().maxCoeff();
    if (max_move * step > 2.0) step = 2.0 / max_move;
    Eigen::VectorXd next, next_grad;
    double next_value = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      next = theta + step * dir;
      next_value = f(next, next_grad);
      if (std::isfinite(next_value) && next_value <= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
    const Eigen::VectorXd s = next - theta;
    const Eigen::VectorXd y = next_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      h_inv = (eye - rho * s * y.transpose()) * h_inv * (eye - rho * y * s.transpose()) +
              rho * s * s.transpose();
    }
    theta = next;
    grad = next_grad;
    value = next_value;
  }
  out.theta = theta;
  out.value = value;
  out.grad_norm = grad.norm();
  out.iterations = it;
  if (!out.converged && out.grad_norm < tol) out.converged = true;
  return out;
}

// Outer-product (BHHH) information; its conditioning flags weakly or
// non-identified parameters.
bool information_well_conditioned(const ParamLayout& layout, const NlParams& params,
                                  std::span<const Observation> observations) {
  const auto n = static_cast<Eigen::Index>(layout.size());
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> g(layout.size());
  for (const Observation& obs : observations) {
    if (!std::isfinite(observation_score(layout, params, obs, g))) return false;
    const Eigen::Map<const Eigen::VectorXd> score(g.data(), n);
    info += score * score.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  return largest > 1e-12 && smallest > 1e-10 * largest;
}

}  // namespace

std::vector<double> ParamLayout::pack(const NlParams& params) const {
  std::vector<double> theta{params.beta_ovtt, params.beta_ivtt, params.beta_cost};
  for (double m : params.mu) theta.push_back(std::log(m));
  if (free_asc) {
    for (std::size_t k = 1; k < kModeCount; ++k) theta.push_back(params.asc[k] - params.asc[0]);
  }
  return theta;
}

NlParams ParamLayout::unpack(std::span<const double> theta) const {
  if (theta.size() != size()) throw std::invalid_argument("ParamLayout: size mismatch");
  NlParams p;
  p.beta_ovtt = theta[0];
  p.beta_ivtt = theta[1];
  p.beta_cost = theta[2];
  for (std::size_t m = 0; m < kNestCount; ++m) p.mu[m] = std::exp(theta[kTaste + m]);
  if (free_asc) {
    for (std::size_t k = 1; k < kModeCount; ++k) p.asc[k] = theta[kTaste + kNestCount + k - 1];
  }
  return p;
}

double mean_log_likelihood(const ParamLayout& layout, std::span<const double> theta,
                           std::span<const Observation> observations, std::span<double> gradient) {
  if (gradient.size() != layout.size()) throw std::invalid_argument("mean_log_likelihood: gradient size");
  std::fill(gradient.begin(), gradient.end(), 0.0);
  if (observations.empty()) return 0.0;
  const NlParams params = layout.unpack(theta);
  std::vector<double> g(layout.size());
  double ll = 0.0;
  for (const Observation& obs : observations) {
    const double lp = observation_score(layout, params, obs, g);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    ll += lp;
    for (std::size_t i = 0; i < g.size(); ++i) gradient[i] += g[i];
  }
  const double n = static_cast<double>(observations.size());
  for (double& gi : gradient) gi /= n;
  return ll / n;
}

EstimateResult estimate(std::span<const Observation> observations, const NlParams& init,
                        const EstimateOptions& options) {
  init.validate();
  const ParamLayout layout{options.free_asc};
  const Objective objective{layout, observations};
  const std::vector<double> packed = layout.pack(init);
  const Eigen::VectorXd theta0 = Eigen::Map<const Eigen::VectorXd>(packed.data(), static_cast<Eigen::Index>(packed.size()));

  Eigen::VectorXd g0;
  if (!std::isfinite(objective(theta0, g0))) {
    throw std::invalid_argument("estimate: log-likelihood is not finite at the initial parameters");
  }

  EstimateResult result;
  result.params = init;
  result.log_likelihood = log_likelihood(init, observations);
  result.gradient_norm = g0.norm();
  if (observations.empty()) {
    result.status = EstimateStatus::converged_with_warning;
    result.identified = false;
    result.message = "no observations";
    return result;
  }

  std::mt19937_64 rng(options.jitter_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  bool have_best = false;
  BfgsOutcome best;
  for (int s = 0; s < std::max(1, options.starts); ++s) {
    Eigen::VectorXd start = theta0;
    if (s > 0) {
      for (Eigen::Index i = 0; i < start.size(); ++i) {
        const bool is_taste = i < static_cast<Eigen::Index>(kTaste);
        start[i] += is_taste ? 0.25 * std::abs(start[i]) * unit(rng) + 0.005 * unit(rng) : 0.3 * unit(rng);
      }
      Eigen::VectorXd tmp;
      if (!std::isfinite(objective(start, tmp))) continue;
    }
    BfgsOutcome run = bfgs(objective, start, options.max_iterations, options.gradient_tolerance);
    if (!std::isfinite(run.value) || !run.theta.allFinite()) continue;
    if (!have_best || run.value < best.value) {
      best = run;
      have_best = true;
    }
  }

  if (!have_best) {
    result.status = EstimateStatus::failed;
    result.message = "optimizer produced no finite solution; returning init";
    return result;
  }
  const NlParams fitted = layout.unpack({best.theta.data(), static_cast<std::size_t>(best.theta.size())});
  result.iterations = best.iterations;
  result.gradient_norm = best.grad_norm;
  result.identified = information_well_conditioned(layout, fitted, observations);

  const bool runaway = best.theta.cwiseAbs().maxCoeff() > 50.0;
  if (runaway || (!best.converged && !best.stalled)) {
    result.status = EstimateStatus::failed;
    result.identified = result.identified && !runaway;
    result.message = runaway ? "parameters diverged (likelihood unbounded); returning init"
                             : "iteration limit reached; returning init";
    return result;
  }
  result.params = fitted;
  result.log_likelihood = -best.value * static_cast<double>(observations.size());
  if (best.converged && result.identified) {
    result.status = EstimateStatus::converged;
  } else {
    result.status = EstimateStatus::converged_with_warning;
    result.message = !result.identified ? "information matrix singular; parameters not identified"
                                        : "line search stalled before gradient tolerance";
  }
  return result;
}

}  // namespace mts
