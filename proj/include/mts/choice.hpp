#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mts/demand.hpp"

namespace mts {

inline constexpr std::size_t kMaxNests = 8;
inline constexpr std::size_t kNestCount = 3;

/// Partition of alternatives 0..n-1 into nests.
struct NestStructure {
  std::size_t alternative_count = 0;
  std::vector<std::vector<std::size_t>> nests;

  /// {walk, bike}, {car, taxi}, {transit, rideshare, rideshare+transit}.
  static const NestStructure& modes();
  std::size_t nest_of(std::size_t alternative) const;
};

enum class Nest : int { nonmotorized = 0, automobile = 1, public_transport = 2 };

struct NlParams {
  double beta_ovtt = 0.0;
  double beta_ivtt = 0.0;
  double beta_cost = 0.0;
  std::array<double, kModeCount> asc{};
  std::array<double, kNestCount> mu{1.0, 1.0, 1.0};

  static NlParams reference_truth();
  static NlParams reference_initial_guess();
  void validate() const;
};

struct Observation {
  ModeAttributes attributes{};
  Mode chosen = Mode::walk;
};

double systematic_utility(const NlParams& params, Mode mode, const AltAttributes& attrs);

/// ln sum_j exp(V_j / mu), max-shifted. Requires a non-empty span.
double inclusive_value(double mu, std::span<const double> utilities);

/// Nested-logit probabilities for a generic nest structure. Unavailable
/// alternatives get probability 0 and nests left empty are dropped.
void nl_probabilities(std::span<const double> utilities, std::span<const bool> available,
                      const NestStructure& nests, std::span<const double> mu,
                      std::span<double> out);

using ModeProbabilities = std::array<double, kModeCount>;
using ModeUtilities = std::array<double, kModeCount>;

ModeUtilities mode_utilities(const NlParams& params, const ModeAttributes& attrs);
ModeProbabilities choice_probabilities(const NlParams& params, const ModeAttributes& attrs);
ModeProbabilities choice_probabilities(const ModeUtilities& utilities, const ModeAttributes& attrs,
                                       const std::array<double, kNestCount>& mu);

/// Inverse-CDF draw in canonical order using the uniform variate u in [0,1).
std::size_t sample_choice(double u, std::span<const double> probabilities);
std::size_t sample_choice(Rng& rng, std::span<const double> probabilities);

/// Sum of ln P(chosen). Returns -inf when a chosen alternative has zero
/// probability or is unavailable.
double log_likelihood(const NlParams& params, std::span<const Observation> observations);

/// Parameters the estimator learns: three taste coefficients, then ln(mu) per
/// nest, then (optionally) ASCs of every mode except walk.
struct ParamLayout {
  bool free_asc = false;
  std::size_t size() const { return 3 + kNestCount + (free_asc ? kModeCount - 1 : 0); }
  std::vector<double> pack(const NlParams& params) const;
  NlParams unpack(std::span<const double> theta) const;
};

/// Mean log-likelihood per observation and its gradient over `layout`.
double mean_log_likelihood(const ParamLayout& layout, std::span<const double> theta,
                           std::span<const Observation> observations,
                           std::span<double> gradient);

enum class EstimateStatus { converged, converged_with_warning, failed };

struct EstimateOptions {
  bool free_asc = false;
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  int starts = 3;
  unsigned long long jitter_seed = 20240611ULL;
};

struct EstimateResult {
  NlParams params;
  EstimateStatus status = EstimateStatus::failed;
  bool identified = true;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  std::string message;
};

/// Maximum-likelihood fit of the nested-logit model.
/// Throws std::invalid_argument when the likelihood at `init` is not finite.
EstimateResult estimate(std::span<const Observation> observations, const NlParams& init,
                        const EstimateOptions& options = {});

/// Sum of absolute differences over the taste coefficients and nest scales.
double gap(const NlParams& estimated, const NlParams& truth);
double gap(std::span<const double> estimated, std::span<const double> truth);

void write_observations_csv(std::ostream& out, std::span<const Observation> observations);
std::vector<Observation> read_observations_csv(std::istream& in);

}  // namespace mts
