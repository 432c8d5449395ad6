#pragma once

// Self-similar sets: Minkowski dimension and (average) Minkowski content via
// the renewal series for the parallel volume.

#include <optional>
#include <vector>

#include "rpf/potential.hpp"
#include "rpf/renewal.hpp"
#include "rpf/time_function.hpp"

namespace rpf {

struct SelfSimilarSystem {
  std::vector<double> ratios;
  int ambient_dim = 1;
  /// t -> lambda_d(F_{e^{-t}} cap Gamma).
  TimeFunction gamma_tube;

  /// Throws InputError unless M >= 2, every ratio lies in (0,1) and d >= 1.
  void validate() const;
  /// The Sierpinski gasket: three maps of ratio 1/2 in the plane.
  static SelfSimilarSystem sierpinski_gasket();
};

/// Root of sum r_i^D = 1 by bisection.
double minkowski_dimension(std::span<const double> ratios, double tol = 1e-13);

/// 3/2 e^{-t} - 3 sqrt3 e^{-2t} for t >= log(4 sqrt3), sqrt3/16 otherwise.
double sierpinski_gamma_tube(double t);

/// Full shift, xi = -log r, eta = -d xi, chi = 1, f = gamma_tube.
RenewalProblem tube_problem(const SelfSimilarSystem& system);

/// The renewal series for lambda_d(F_{e^{-t}} cap O).
EvalResult tube_volume_series(const SelfSimilarSystem& system, double t, double tol = 1e-12);

struct ContentResult {
  double dimension = 0.0;
  LatticeKind lattice_kind = LatticeKind::inconclusive;
  std::optional<double> span;
  double numerator = 0.0;
  double denominator = 0.0;
  /// numerator / denominator: the Minkowski content in the non-lattice case,
  /// the average content in the lattice case.
  double content = 0.0;
};

/// Throws InputError if gamma_tube decays too slowly for the integral to converge.
ContentResult average_minkowski_content(const SelfSimilarSystem& system);

}  // namespace rpf
