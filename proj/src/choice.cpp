#include "mts/choice.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mts {

const NestStructure& NestStructure::modes() {
  static const NestStructure structure{
      kModeCount,
      {{index(Mode::walk), index(Mode::bike)},
       {index(Mode::car), index(Mode::taxi)},
       {index(Mode::transit), index(Mode::rideshare), index(Mode::rideshare_transit)}}};
  return structure;
}

std::size_t NestStructure::nest_of(std::size_t alternative) const {
  for (std::size_t m = 0; m < nests.size(); ++m) {
    if (std::find(nests[m].begin(), nests[m].end(), alternative) != nests[m].end()) return m;
  }
  throw std::out_of_range("nest_of: alternative in no nest");
}

NlParams NlParams::reference_truth() {
  NlParams p;
  p.beta_ovtt = -0.032;
  p.beta_ivtt = -0.023;
  p.beta_cost = -0.074;
  p.mu = {1.0, 2.0, 2.0};
  return p;
}

NlParams NlParams::reference_initial_guess() {
  NlParams p;
  p.beta_ovtt = -0.2;
  p.beta_ivtt = -0.1;
  p.beta_cost = -0.1;
  p.mu = {1.0, 1.0, 1.0};
  return p;
}

void NlParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(beta_ovtt) || !finite(beta_ivtt) || !finite(beta_cost) ||
      !std::all_of(asc.begin(), asc.end(), finite)) {
    throw std::invalid_argument("NlParams: non-finite coefficient");
  }
  for (double m : mu) {
    if (!(m > 0.0) || !finite(m)) throw std::invalid_argument("NlParams: nest scale must be positive");
  }
}

double systematic_utility(const NlParams& params, Mode mode, const AltAttributes& attrs) {
  return params.asc[index(mode)] + params.beta_ovtt * attrs.ovtt + params.beta_ivtt * attrs.ivtt +
         params.beta_cost * attrs.cost;
}

double inclusive_value(double mu, std::span<const double> utilities) {
  if (utilities.empty()) throw std::invalid_argument("inclusive_value: empty nest");
  double top = -std::numeric_limits<double>::infinity();
  for (double v : utilities) top = std::max(top, v / mu);
  double sum = 0.0;
  for (double v : utilities) sum += std::exp(v / mu - top);
  return top + std::log(sum);
}

void nl_probabilities(std::span<const double> utilities, std::span<const bool> available,
                      const NestStructure& nests, std::span<const double> mu,
                      std::span<double> out) {
  const std::size_t n_nests = nests.nests.size();
  if (n_nests > kMaxNests || mu.size() != n_nests || utilities.size() != nests.alternative_count ||
      available.size() != utilities.size() || out.size() != utilities.size()) {
    throw std::invalid_argument("nl_probabilities: size mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);

  // Within-nest max shifts, inclusive values and nest log-weights mu_m * I_m.
  std::array<double, kMaxNests> shift{};
  std::array<double, kMaxNests> denom{};
  std::array<double, kMaxNests> weight{};
  std::array<bool, kMaxNests> present{};
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < n_nests; ++m) {
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t j : nests.nests[m]) {
      if (available[j]) s = std::max(s, utilities[j] / mu[m]);
    }
    if (s == -std::numeric_limits<double>::infinity()) continue;
    double sum = 0.0;
    for (std::size_t j : nests.nests[m]) {
      if (available[j]) sum += std::exp(utilities[j] / mu[m] - s);
    }
    present[m] = true;
    shift[m] = s;
    denom[m] = sum;
    weight[m] = mu[m] * (s + std::log(sum));
    top = std::max(top, weight[m]);
  }
  if (top == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("nl_probabilities: no available alternative");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < n_nests; ++m) {
    if (present[m]) total += std::exp(weight[m] - top);
  }
  for (std::size_t m = 0; m < n_nests; ++m) {
    if (!present[m]) continue;
    const double nest_p = std::exp(weight[m] - top) / total;
    for (std::size_t j : nests.nests[m]) {
      if (available[j]) out[j] = nest_p * std::exp(utilities[j] / mu[m] - shift[m]) / denom[m];
    }
  }
}

ModeUtilities mode_utilities(const NlParams& params, const ModeAttributes& attrs) {
  ModeUtilities v{};
  for (Mode m : kAllModes) {
    if (attrs[index(m)].available) v[index(m)] = systematic_utility(params, m, attrs[index(m)]);
  }
  return v;
}

ModeProbabilities choice_probabilities(const ModeUtilities& utilities, const ModeAttributes& attrs,
                                       const std::array<double, kNestCount>& mu) {
  std::array<bool, kModeCount> avail{};
  for (std::size_t j = 0; j < kModeCount; ++j) avail[j] = attrs[j].available;
  ModeProbabilities p{};
  nl_probabilities(utilities, avail, NestStructure::modes(), mu, p);
  return p;
}

ModeProbabilities choice_probabilities(const NlParams& params, const ModeAttributes& attrs) {
  return choice_probabilities(mode_utilities(params, attrs), attrs, params.mu);
}

std::size_t sample_choice(double u, std::span<const double> probabilities) {
  if (probabilities.empty()) throw std::invalid_argument("sample_choice: empty distribution");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("sample_choice: invalid probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("sample_choice: probabilities do not sum to 1");
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    if (probabilities[j] <= 0.0) continue;
    last_positive = j;
    cumulative += probabilities[j];
    if (u < cumulative) return j;
  }
  return last_positive;
}

std::size_t sample_choice(Rng& rng, std::span<const double> probabilities) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return sample_choice(unit(rng), probabilities);
}

double log_likelihood(const NlParams& params, std::span<const Observation> observations) {
  double ll = 0.0;
  for (const Observation& obs : observations) {
    const std::size_t c = index(obs.chosen);
    if (!obs.attributes[c].available) return -std::numeric_limits<double>::infinity();
    const double p = choice_probabilities(params, obs.attributes)[c];
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += std::log(p);
  }
  return ll;
}

double gap(const NlParams& estimated, const NlParams& truth) {
  double g = std::abs(estimated.beta_ovtt - truth.beta_ovtt) +
             std::abs(estimated.beta_ivtt - truth.beta_ivtt) +
             std::abs(estimated.beta_cost - truth.beta_cost);
  for (std::size_t m = 0; m < kNestCount; ++m) g += std::abs(estimated.mu[m] - truth.mu[m]);
  return g;
}

double gap(std::span<const double> estimated, std::span<const double> truth) {
  if (estimated.size() != truth.size()) throw std::invalid_argument("gap: parameter layout mismatch");
  double g = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) g += std::abs(estimated[i] - truth[i]);
  return g;
}

void write_observations_csv(std::ostream& out, std::span<const Observation> observations) {
  for (Mode m : kAllModes) {
    const auto name = mode_name(m);
    out << name << "_ovtt," << name << "_ivtt," << name << "_cost," << name << "_avail,";
  }
  out << "chosen\n" << std::setprecision(17);
  for (const Observation& obs : observations) {
    for (const AltAttributes& a : obs.attributes) {
      out << a.ovtt << ',' << a.ivtt << ',' << a.cost << ',' << (a.available ? 1 : 0) << ',';
    }
    out << index(obs.chosen) << '\n';
  }
}

std::vector<Observation> read_observations_csv(std::istream& in) {
  std::vector<Observation> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Observation obs;
    for (AltAttributes& a : obs.attributes) {
      int avail = 0;
      row >> a.ovtt >> a.ivtt >> a.cost >> avail;
      a.available = avail != 0;
    }
    int chosen = -1;
    row >> chosen;
    if (!row || chosen < 0 || chosen >= static_cast<int>(kModeCount)) {
      throw std::runtime_error("observations csv: malformed row at line " + std::to_string(line_no));
    }
    obs.chosen = static_cast<Mode>(chosen);
    out.push_back(obs);
  }
  return out;
}

}  // namespace mts
