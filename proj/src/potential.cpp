#include "rpf/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rpf/errors.hpp"

namespace rpf {

Potential::Potential(const Subshift& shift, int depth, std::vector<double> values)
    : index_(std::make_shared<const CylinderIndex>(shift, depth)), values_(std::move(values)) {
  if (values_.size() != index_->size())
    throw InputError(fmt::format("potential of depth {} needs {} values, got {}", depth, index_->size(),
                                 values_.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw InputError("potential values must be finite");
}

Potential Potential::constant(const Subshift& shift, double c) {
  return Potential(shift, 1, std::vector<double>(static_cast<std::size_t>(shift.alphabet_size()), c));
}

Potential Potential::from_function(const Subshift& shift, int depth, const std::function<double(const Word&)>& fn) {
  std::vector<double> vals;
  for (const auto& w : admissible_words(shift, depth)) vals.push_back(fn(w));
  return Potential(shift, depth, std::move(vals));
}

double Potential::eval(std::span<const int> w) const {
  return values_[index_->index_of(w)];
}

Potential Potential::lifted(int new_depth) const {
  if (new_depth < depth())
    throw InputError(fmt::format("cannot lift a depth-{} potential to depth {}", depth(), new_depth));
  if (new_depth == depth()) return *this;
  return from_function(shift(), new_depth, [this](const Word& w) { return eval(w); });
}

double Potential::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double Potential::max_value() const { return *std::max_element(values_.begin(), values_.end()); }
bool Potential::is_constant(double tol) const { return max_value() - min_value() <= tol; }

Potential combine(double a, const Potential& p, double b, const Potential& q) {
  if (!(p.shift() == q.shift())) throw InputError("potentials live on different subshifts");
  const int d = std::max(p.depth(), q.depth());
  return Potential::from_function(p.shift(), d, [&](const Word& w) { return a * p.eval(w) + b * q.eval(w); });
}

Potential operator+(const Potential& p, const Potential& q) { return combine(1.0, p, 1.0, q); }
Potential operator-(const Potential& p, const Potential& q) { return combine(1.0, p, -1.0, q); }
Potential operator*(double c, const Potential& p) {
  std::vector<double> v(p.values().begin(), p.values().end());
  for (double& x : v) x *= c;
  return Potential(p.shift(), p.depth(), std::move(v));
}

double birkhoff_sum(const Potential& pot, const Word& u, const Word& x_head) {
  if (u.empty()) return 0.0;
  Word y = u;
  y.insert(y.end(), x_head.begin(), x_head.end());
  if (!pot.shift().admissible(y)) throw InputError("prefix·base is not admissible");
  if (x_head.size() + 1 < static_cast<std::size_t>(pot.depth()))
    throw InputError(fmt::format("base word needs at least {} letters for a depth-{} potential",
                                 pot.depth() - 1, pot.depth()));
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += pot.eval(std::span<const int>(y).subspan(k));
  return s;
}

double birkhoff_sum(const Potential& pot, const Word& u, const Word& x_head, int n) {
  if (n < 0 || static_cast<std::size_t>(n) != u.size())
    throw InputError(fmt::format("prefix has length {}, expected {}", u.size(), n));
  return birkhoff_sum(pot, u, x_head);
}

int graph_depth_for(const Potential& pot) { return std::max(pot.depth() - 1, 1); }

std::vector<double> edge_weights(const CylinderGraph& graph, const Potential& pot) {
  if (graph.nodes.depth() + 1 < pot.depth())
    throw InputError("cylinder graph too shallow for this potential");
  std::vector<double> w;
  w.reserve(graph.edges.size());
  for (const auto& e : graph.edges) w.push_back(pot.eval(e.word));
  return w;
}

PositivityReport check_eventually_positive(const Potential& xi) {
  PositivityReport rep;
  rep.graph_depth = graph_depth_for(xi);
  const CylinderGraph graph(xi.shift(), rep.graph_depth);
  const auto w = edge_weights(graph, xi);
  const MeanCycle mc = min_mean_cycle(graph, w);
  rep.kappa = mc.value;
  rep.critical_cycle = cycle_word(graph, mc.cycle);
  rep.eventually_positive = mc.value > 0.0;
  if (!rep.eventually_positive) return rep;

  // w(e) >= kappa + phi(to) - phi(from) for the shortest-walk potential phi,
  // so an n-edge walk has weight >= n*kappa - (max phi - min phi).
  rep.node_potential = walk_potential(graph, w, rep.kappa);
  double violation = 0.0;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    violation = std::max(violation, rep.kappa + rep.node_potential[edge.to] - rep.node_potential[edge.from] - w[e]);
  }
  const auto [lo, hi] = std::minmax_element(rep.node_potential.begin(), rep.node_potential.end());
  double scale = 1.0;
  for (double x : w) scale = std::max(scale, std::abs(x));
  // Rounding slack: each edge inequality may be violated by a few ulps.
  const double per_edge_slack = std::max(violation, 0.0) + 1e-13 * scale;
  rep.kappa0 = (*hi - *lo) + 1e-12 * scale;
  rep.kappa_lower = rep.kappa - per_edge_slack;
  if (rep.kappa_lower <= 0.0) {
    rep.eventually_positive = false;
    return rep;
  }
  rep.m_star = static_cast<std::int64_t>(std::floor(rep.kappa0 / rep.kappa_lower)) + 1;
  return rep;
}

std::string to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::lattice: return "lattice";
    case LatticeKind::non_lattice: return "non-lattice";
    case LatticeKind::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double real_gcd(std::span<const double> values, double tol) {
  double g = 0.0;
  for (double raw : values) {
    double b = std::abs(raw);
    if (b < tol) continue;
    if (g == 0.0) {
      g = b;
      continue;
    }
    double a = std::max(g, b);
    b = std::min(g, b);
    while (b >= tol) {
      double r = std::fmod(a, b);
      if (b - r < tol) r = 0.0;
      a = b;
      b = r;
    }
    g = a;
  }
  return g;
}

LatticeReport detect_lattice(const Potential& xi, int max_cycle_len, double tol) {
  if (!(tol > 0.0)) throw InputError("lattice tolerance must be positive");
  LatticeReport rep;
  const CylinderGraph graph(xi.shift(), graph_depth_for(xi));
  if (max_cycle_len <= 0) max_cycle_len = static_cast<int>(graph.node_count());
  const auto w = edge_weights(graph, xi);
  for (const auto& cyc : enumerate_cycles(graph, max_cycle_len)) rep.cycle_sums.push_back(cycle_weight(graph, cyc, w));

  const double g = real_gcd(rep.cycle_sums, tol);
  rep.gcd_candidate = g;
  if (g < 1e3 * tol) {
    rep.kind = LatticeKind::non_lattice;
    return rep;
  }
  auto in_lattice = [&](double v) {
    const double q = std::round(v / g);
    return std::abs(v - q * g) <= tol * std::max(1.0, std::abs(v));
  };
  if (!std::all_of(rep.cycle_sums.begin(), rep.cycle_sums.end(), in_lattice)) {
    rep.kind = LatticeKind::inconclusive;
    return rep;
  }
  rep.kind = LatticeKind::lattice;
  rep.span = g;
  // zeta = xi, psi = 0 works exactly when the table itself lies in gZ.
  if (std::all_of(xi.values().begin(), xi.values().end(), in_lattice)) {
    rep.zeta = xi;
    rep.psi = Potential::constant(xi.shift(), 0.0);
  }
  return rep;
}

LatticeReport lattice_from_cohomology(const Potential& xi, double span, const Potential& zeta, const Potential& psi,
                                      double tol) {
  if (!(span > 0.0)) throw InputError("lattice span must be positive");
  if (!(xi.shift() == zeta.shift()) || !(xi.shift() == psi.shift()))
    throw InputError("lattice data lives on a different subshift");
  for (double v : zeta.values()) {
    const double q = std::round(v / span);
    if (std::abs(v - q * span) > tol * std::max(1.0, std::abs(v)))
      throw InputError(fmt::format("zeta value {} is not in {}·Z", v, span));
  }
  const int len = std::max({xi.depth(), zeta.depth(), psi.depth() + 1});
  for (const auto& y : admissible_words(xi.shift(), len)) {
    const double lhs = xi.eval(y) - zeta.eval(y);
    const double rhs = psi.eval(y) - psi.eval(std::span<const int>(y).subspan(1));
    if (std::abs(lhs - rhs) > tol * std::max(1.0, std::abs(lhs)))
      throw InputError(fmt::format("xi - zeta != psi - psi∘sigma on cylinder {}", format_word(y, xi.shift().alphabet_size())));
  }
  LatticeReport rep;
  rep.kind = LatticeKind::lattice;
  rep.span = span;
  rep.zeta = zeta;
  rep.psi = psi;
  rep.gcd_candidate = span;
  return rep;
}

Potential geometric_potential(std::span<const double> ratios) {
  if (ratios.size() < 2) throw InputError(fmt::format("need at least 2 ratios, got {}", ratios.size()));
  std::vector<double> vals;
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw InputError(fmt::format("contraction ratio {} is outside (0,1)", r));
    vals.push_back(-std::log(r));
  }
  return Potential(Subshift::full(static_cast<int>(ratios.size())), 1, std::move(vals));
}

}  // namespace rpf
