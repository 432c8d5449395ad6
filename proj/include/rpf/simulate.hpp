#pragma once

// Monte-Carlo realization of the point process with dependent interarrival
// times W_n = xi(X_{n+1} X_n ... X_1 x), letters drawn from normalized eta.

#include <cstdint>
#include <vector>

#include "rpf/potential.hpp"
#include "rpf/renewal.hpp"

namespace rpf {

struct SimulationSpec {
  /// Row-stochastic: sum_j e^{eta(j w)} = 1 for every admissible w.
  Potential eta;
  Potential xi;
  /// f~ with chi already folded in.
  FFamily f;
  Word x_head;
  std::int64_t n_max = 1000;
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 0;

  /// Throws InputError on shape problems or if eta is not normalized to 1e-10.
  void validate() const;
  /// The deterministic problem with the same expectation (chi = 1).
  RenewalProblem problem() const;
  /// Folds chi into f; eta must already be normalized.
  static SimulationSpec from_problem(const RenewalProblem& problem, std::int64_t n_max, std::int64_t n_paths,
                                     std::uint64_t seed);
};

struct SamplePath {
  /// X_1 .. X_{n_max}.
  std::vector<int> letters;
  /// W_0 .. W_{n_max - 1}.
  std::vector<double> interarrivals;
};

/// Deterministic in (spec.seed, path_index) and independent of n_paths.
SamplePath sample_path(const SimulationSpec& spec, std::int64_t path_index);

struct EmpiricalValue {
  double t = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Monte-Carlo estimate of N(t, x) at each t, one set of paths shared by all
/// t. Requires every f~ to vanish below a common T_lo; throws HorizonError
/// if some path has sum_{k < n_max} W_k <= t - T_lo.
std::vector<EmpiricalValue> empirical_N(const SimulationSpec& spec, std::span<const double> ts);
EmpiricalValue empirical_N(const SimulationSpec& spec, double t);

/// n_max guaranteed to satisfy the horizon condition for time t.
std::int64_t required_horizon(const SimulationSpec& spec, double t);

}  // namespace rpf
