#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "rpf/errors.hpp"
#include "rpf/renewal.hpp"

namespace rpf {

namespace {

constexpr int kCellSamples = 32;
constexpr double kWindowTail = 1e-12;

// Window [lo, hi] outside of which the family's total mass of
// e^{-delta t}|f| is below kWindowTail per side. Sets *infinite when a tail
// is not integrable.
std::pair<double, double> dri_window(std::span<const TimeFunction> family, double delta, bool* infinite) {
  double lo = kInf, hi = -kInf;
  *infinite = false;
  for (const auto& f : family) {
    if (f.is_zero()) continue;
    double a = f.support_lo();
    if (a == -kInf) {
      const double rs = f.lower_rate_sup();
      if (!(rs > delta)) {
        *infinite = true;
        return {0.0, 0.0};
      }
      const double r = f.lower_rate_strict() ? 0.5 * (rs + delta) : rs;
      const auto tb = f.lower_tail(r);
      const double k = r - delta;
      a = tb->anchor;
      if (tb->constant > 0.0) a = std::min(a, std::log(kWindowTail * k / tb->constant) / k);
    }
    double b = f.support_hi();
    if (b == kInf) {
      const double ri = f.upper_rate_inf();
      if (!(ri < delta)) {
        *infinite = true;
        return {0.0, 0.0};
      }
      const double r = f.upper_rate_strict() ? 0.5 * (ri + delta) : ri;
      const auto tb = f.upper_tail(r);
      const double k = delta - r;
      b = tb->anchor;
      if (tb->constant > 0.0) b = std::max(b, std::log(tb->constant / (kWindowTail * k)) / k);
    }
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  if (lo > hi) return {0.0, 0.0};
  return {lo, hi};
}

}  // namespace

DriReport dri_check(std::span<const TimeFunction> family, double delta, std::span<const double> meshes,
                    double threshold) {
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    if (!(meshes[i] > 0.0)) throw InputError("mesh sizes must be positive");
    if (i > 0 && !(meshes[i] < meshes[i - 1])) throw InputError("mesh sizes must be decreasing");
  }
  DriReport rep;
  auto [lo, hi] = dri_window(family, delta, &rep.upper_infinite);
  rep.window_lo = lo;
  rep.window_hi = hi;
  auto g = [&](const TimeFunction& f, double t, bool left) {
    return std::exp(-delta * t) * std::abs(left ? f.eval_left_limit(t) : f.eval(t));
  };

  for (double h : meshes) {
    DriRow row{h, 0.0, 0.0};
    if (rep.upper_infinite) {
      row.upper = kInf;
      row.lower = kInf;
      rep.rows.push_back(row);
      continue;
    }
    if (lo == hi) {
      rep.rows.push_back(row);
      continue;
    }
    const auto k_first = static_cast<long long>(std::floor(lo / h)) + 1;
    const auto k_last = static_cast<long long>(std::ceil(hi / h));
    double lower = 0.0, upper = 0.0;
    for (long long k = k_first; k <= k_last; ++k) {
      const double a = static_cast<double>(k - 1) * h, b = static_cast<double>(k) * h;
      double inf = kInf, sup = 0.0;
      for (const auto& f : family) {
        auto take = [&](double v) {
          inf = std::min(inf, v);
          sup = std::max(sup, v);
        };
        take(g(f, a, false));
        take(g(f, b, true));
        for (int s = 1; s < kCellSamples; ++s) take(g(f, a + (b - a) * s / kCellSamples, false));
        if (const auto& gd = f.grid_data()) {
          const double first = std::ceil((a - gd->t0) / gd->dt);
          for (double i = std::max(first, 0.0); i < static_cast<double>(gd->values.size()); ++i) {
            const double t = gd->t0 + gd->dt * i;
            if (t >= b) break;
            take(g(f, t, false));
            take(g(f, t, true));
          }
        } else {
          for (double t : f.breakpoints())
            if (t > a && t < b) {
              take(g(f, t, false));
              take(g(f, t, true));
            }
        }
      }
      lower += h * inf;
      upper += h * sup;
    }
    row.lower = lower;
    row.upper = upper + 2.0 * kWindowTail * static_cast<double>(family.size());
    rep.rows.push_back(row);
  }

  if (!rep.upper_infinite && !rep.rows.empty()) {
    bool mono = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      const double prev = rep.rows[i - 1].upper - rep.rows[i - 1].lower;
      const double cur = rep.rows[i].upper - rep.rows[i].lower;
      if (cur > prev * (1.0 + 1e-9) + 1e-13) mono = false;
    }
    rep.consistent = mono && rep.rows.back().upper - rep.rows.back().lower < threshold;
  }
  return rep;
}

DriReport dri_check(const TimeFunction& f, double delta, std::span<const double> meshes, double threshold) {
  return dri_check(std::span<const TimeFunction>(&f, 1), delta, meshes, threshold);
}

namespace {

// integral of e^{-delta t}|f(t)|, or +inf when a tail is not integrable.
double abs_weighted_integral(const TimeFunction& f, double delta) {
  if (f.is_zero()) return 0.0;
  if (f.support_lo() == -kInf && !(f.lower_rate_sup() > delta)) return kInf;
  if (f.support_hi() == kInf && !(f.upper_rate_inf() < delta)) return kInf;
  if (const auto& gd = f.grid_data()) {
    // Exact on each linear segment, split at sign changes.
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < gd->values.size(); ++i) {
      const double a = gd->t0 + gd->dt * static_cast<double>(i), b = a + gd->dt;
      const double y0 = gd->values[i], y1 = gd->values[i + 1];
      auto seg = [&](double u, double v, double sign) {
        const double slope = (y1 - y0) / gd->dt;
        return sign * ((y0 - slope * a) * integrate_monomial_exp(0, -delta, u, v) +
                       slope * integrate_monomial_exp(1, -delta, u, v));
      };
      if (y0 * y1 < 0.0) {
        const double z = a + gd->dt * y0 / (y0 - y1);
        s += seg(a, z, y0 > 0 ? 1.0 : -1.0) + seg(z, b, y1 > 0 ? 1.0 : -1.0);
      } else {
        s += seg(a, b, (y0 + y1) >= 0.0 ? 1.0 : -1.0);
      }
    }
    return s;
  }
  using boost::math::quadrature::gauss_kronrod;
  double s = 0.0;
  for (const auto& p : f.pieces()) {
    if (p.terms.empty()) continue;
    auto integrand = [&](double t) { return std::exp(-delta * t) * std::abs(f.eval(t)); };
    // eval() is right-continuous; the integral does not see single points.
    const double lo = p.from, hi = p.to;
    auto inner = [&](double t) {
      const double tt = std::clamp(t, std::nextafter(lo, kInf), std::nextafter(hi, -kInf));
      return integrand(tt);
    };
    s += gauss_kronrod<double, 61>::integrate(inner, lo, hi, 15, 1e-12);
  }
  return s;
}

bool sampled_monotone(const TimeFunction& f, std::span<const double> t_grid) {
  std::vector<double> ts(t_grid.begin(), t_grid.end());
  for (double b : f.breakpoints()) ts.push_back(b);
  std::sort(ts.begin(), ts.end());
  bool up = true, down = true;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double d = f.eval(ts[i]) - f.eval(ts[i - 1]);
    if (d < 0.0) up = false;
    if (d > 0.0) down = false;
  }
  return up || down;
}

}  // namespace

ConditionReport check_conditions(const RenewalProblem& problem, std::span<const double> t_grid,
                                 std::span<const double> h_grid, double tol) {
  if (t_grid.empty() || h_grid.empty()) throw InputError("condition grids must be nonempty");
  const auto analysis = analyze(problem);
  ConditionReport rep;
  const double delta = analysis.delta.delta;
  rep.delta = delta;
  const auto& fs = problem.f.functions();

  rep.a_holds = true;
  for (const auto& f : fs) {
    const double v = abs_weighted_integral(f, delta);
    rep.a_integrals.push_back(v);
    if (!std::isfinite(v)) rep.a_holds = false;
  }

  // (B) and (C) over every base cylinder of the state depth.
  const RenewalEvaluator ev(problem);
  const auto heads = admissible_words(problem.shift(), ev.state_depth());
  EvalOptions opts;
  opts.absolute = true;
  std::vector<double> neg_t, neg_v;
  rep.b_constant = 0.0;
  bool finite = true;
  for (double t : t_grid) {
    opts.tol = tol * std::exp(delta * t);
    double vmax = 0.0;
    for (const auto& head : heads) {
      const double v = std::exp(-delta * t) * ev.eval_at(t, head, opts).value;
      vmax = std::max(vmax, v);
    }
    if (!std::isfinite(vmax)) finite = false;
    rep.b_constant = std::max(rep.b_constant, vmax);
    if (t < 0.0) {
      neg_t.push_back(t);
      neg_v.push_back(vmax);
    }
  }
  rep.b_holds = finite;

  rep.c_points = static_cast<int>(neg_t.size());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < neg_t.size(); ++i)
    if (neg_v[i] > 0.0) {
      xs.push_back(neg_t[i]);
      ys.push_back(std::log(neg_v[i]));
    }
  if (neg_t.empty()) {
    rep.c_holds = false;
  } else if (xs.empty()) {
    rep.c_rate = kInf;
    rep.c_constant = 0.0;
    rep.c_holds = true;
  } else if (xs.size() == 1) {
    rep.c_holds = false;
  } else {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double den = n * sxx - sx * sx;
    rep.c_rate = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) c = std::max(c, std::exp(ys[i] - rep.c_rate * xs[i]));
    rep.c_constant = c;
    rep.c_holds = rep.c_rate > 0.0;
  }

  rep.d_monotonic = std::all_of(fs.begin(), fs.end(), [&](const TimeFunction& f) { return sampled_monotone(f, t_grid); });
  rep.dri = dri_check(fs, delta, h_grid);
  rep.d_equi_dri = rep.dri.consistent;
  rep.d_holds = rep.d_monotonic || rep.d_equi_dri;
  rep.resolution = fmt::format("{} time points in [{}, {}], {} base cylinders, {} meshes down to h = {}",
                               t_grid.size(), *std::min_element(t_grid.begin(), t_grid.end()),
                               *std::max_element(t_grid.begin(), t_grid.end()), heads.size(), h_grid.size(),
                               h_grid.back());
  return rep;
}

}  // namespace rpf
