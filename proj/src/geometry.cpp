#include "rpf/geometry.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "rpf/errors.hpp"

namespace rpf {

void SelfSimilarSystem::validate() const {
  if (ratios.size() < 2) throw InputError("a self-similar system needs at least 2 maps");
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0)) throw InputError(fmt::format("contraction ratio {} is outside (0,1)", r));
  if (ambient_dim < 1) throw InputError("ambient dimension must be at least 1");
}

SelfSimilarSystem SelfSimilarSystem::sierpinski_gasket() {
  return SelfSimilarSystem{{0.5, 0.5, 0.5}, 2, TimeFunction::sierpinski_gamma()};
}

double minkowski_dimension(std::span<const double> ratios, double tol) {
  if (ratios.size() < 2) throw InputError("need at least 2 ratios");
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0)) throw InputError(fmt::format("contraction ratio {} is outside (0,1)", r));
  // g(D) = sum r_i^D - 1 is strictly decreasing, g(0) = M - 1 > 0.
  auto g = [&](double d) {
    double s = 0.0;
    for (double r : ratios) s += std::pow(r, d);
    return s - 1.0;
  };
  double lo = 0.0, hi = 1.0;
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double sierpinski_gamma_tube(double t) {
  const double s3 = std::sqrt(3.0);
  if (t < std::log(4.0 * s3)) return s3 / 16.0;
  return 1.5 * std::exp(-t) - 3.0 * s3 * std::exp(-2.0 * t);
}

RenewalProblem tube_problem(const SelfSimilarSystem& system) {
  system.validate();
  const Potential xi = geometric_potential(system.ratios);
  const Subshift& shift = xi.shift();
  return RenewalProblem{(-static_cast<double>(system.ambient_dim)) * xi, xi, Potential::constant(shift, 1.0),
                        FFamily::uniform(shift, system.gamma_tube), Word{0}, std::nullopt};
}

EvalResult tube_volume_series(const SelfSimilarSystem& system, double t, double tol) {
  return eval_N(tube_problem(system), t, tol);
}

ContentResult average_minkowski_content(const SelfSimilarSystem& system) {
  system.validate();
  ContentResult res;
  res.dimension = minkowski_dimension(system.ratios);
  const double D = res.dimension;
  const auto lat = detect_lattice(geometric_potential(system.ratios));
  res.lattice_kind = lat.kind;
  res.span = lat.span;
  for (double r : system.ratios) res.denominator -= std::log(r) * std::pow(r, D);
  const double k = -(D - system.ambient_dim);
  const auto& f = system.gamma_tube;
  if (!f.is_zero()) {
    if (f.support_lo() == -kInf && !(f.lower_rate_sup() > -k))
      throw InputError(fmt::format("gamma_tube does not vanish fast enough as t -> -inf for dimension {}", D));
    if (f.support_hi() == kInf && !(f.upper_rate_inf() < -k))
      throw InputError(fmt::format("gamma_tube is not o(e^(t(D-d))) with D = {}", D));
    res.numerator = f.integral_exp(k);
  }
  res.content = res.numerator / res.denominator;
  return res;
}

}  // namespace rpf
