#include "rpf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "rpf/errors.hpp"
#include "rpf/parallel.hpp"

namespace rpf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform53(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

int head_length(const SimulationSpec& spec) {
  return std::max({spec.eta.depth() - 1, spec.xi.depth() - 1, spec.f.depth(), 1});
}

double support_floor(const FFamily& f) {
  double lo = kInf;
  for (const auto& g : f.functions())
    if (!g.is_zero()) lo = std::min(lo, g.support_lo());
  return lo;
}

}  // namespace

void SimulationSpec::validate() const {
  const Subshift& shift = xi.shift();
  if (!(eta.shift() == shift) || !(f.index().shift() == shift)) throw InputError("potentials live on different subshifts");
  if (n_max < 0) throw InputError("n_max must be nonnegative");
  if (n_paths < 2) throw InputError("need at least 2 paths");
  const int need = head_length(*this);
  if (static_cast<int>(x_head.size()) < need || !shift.admissible(x_head))
    throw InputError(fmt::format("base word must be admissible with at least {} letters", need));
  const int d = std::max(eta.depth() - 1, 1);
  for (const Word& w : admissible_words(shift, d)) {
    double s = 0.0;
    Word jw(w.size() + 1);
    std::copy(w.begin(), w.end(), jw.begin() + 1);
    for (int j = 0; j < shift.alphabet_size(); ++j) {
      if (!shift.allowed(j, w[0])) continue;
      jw[0] = j;
      s += std::exp(eta.eval(jw));
    }
    if (std::abs(s - 1.0) > 1e-10)
      throw InputError(fmt::format("eta is not normalized: transition weights from {} sum to {}", format_word(w, shift.alphabet_size()), s));
  }
  if (!check_eventually_positive(xi).eventually_positive)
    throw PreconditionError("xi is not eventually positive");
}

RenewalProblem SimulationSpec::problem() const {
  return RenewalProblem{eta, xi, Potential::constant(xi.shift(), 1.0), f, x_head, std::nullopt};
}

SimulationSpec SimulationSpec::from_problem(const RenewalProblem& problem, std::int64_t n_max, std::int64_t n_paths,
                                            std::uint64_t seed) {
  const int d = std::max(problem.chi.depth(), problem.f.depth());
  std::vector<TimeFunction> fs;
  for (const Word& w : admissible_words(problem.shift(), d))
    fs.push_back(problem.f.at(w).scaled(problem.chi.eval(w)));
  return SimulationSpec{problem.eta, problem.xi, FFamily(problem.shift(), d, std::move(fs)), problem.x_head,
                        n_max, n_paths, seed};
}

SamplePath sample_path(const SimulationSpec& spec, std::int64_t path_index) {
  const Subshift& shift = spec.xi.shift();
  const int m = shift.alphabet_size();
  const int len = head_length(spec) + 1;
  std::mt19937_64 gen(splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(path_index))));

  SamplePath out;
  out.letters.reserve(static_cast<std::size_t>(spec.n_max));
  out.interarrivals.reserve(static_cast<std::size_t>(spec.n_max));
  // cur[0] is the newest letter; only the first len letters matter.
  Word cur(spec.x_head.begin(), spec.x_head.begin() + std::min<std::ptrdiff_t>(len, std::ssize(spec.x_head)));
  Word next(cur.size() + 1);
  for (std::int64_t n = 0; n < spec.n_max; ++n) {
    const double u = uniform53(gen);
    std::copy(cur.begin(), cur.end(), next.begin() + 1);
    double acc = 0.0;
    int pick = -1;
    for (int j = 0; j < m; ++j) {
      if (!shift.allowed(j, cur[0])) continue;
      next[0] = j;
      acc += std::exp(spec.eta.eval(next));
      pick = j;
      if (u < acc) break;
    }
    next[0] = pick;
    out.letters.push_back(pick);
    out.interarrivals.push_back(spec.xi.eval(next));
    if (static_cast<int>(next.size()) > len) next.resize(static_cast<std::size_t>(len));
    cur.assign(next.begin(), next.end());
    next.resize(cur.size() + 1);
  }
  return out;
}

std::int64_t required_horizon(const SimulationSpec& spec, double t) {
  const double lo = support_floor(spec.f);
  if (lo == -kInf) throw UnsupportedInput("simulation needs every f~ to vanish below a common time");
  if (lo == kInf || t < lo) return 0;
  const auto pos = check_eventually_positive(spec.xi);
  // S_n >= n kappa_lower - kappa0 > t - lo + kappa0, and later increments are >= -kappa0.
  return static_cast<std::int64_t>(std::floor((t - lo + 2.0 * pos.kappa0) / pos.kappa_lower)) + 1;
}

std::vector<EmpiricalValue> empirical_N(const SimulationSpec& spec, std::span<const double> ts) {
  spec.validate();
  const double lo = support_floor(spec.f);
  if (lo == -kInf) throw UnsupportedInput("simulation needs every f~ to vanish below a common time");
  const double t_top = ts.empty() ? lo : *std::max_element(ts.begin(), ts.end());
  const std::size_t nt = ts.size();
  const auto np = static_cast<std::size_t>(spec.n_paths);
  std::vector<std::vector<double>> per_t(nt, std::vector<double>(np, 0.0));
  std::vector<char> short_path(np, 0);
  const int fd = spec.f.depth();
  const double slack = check_eventually_positive(spec.xi).kappa0;

  parallel_for(np, [&](std::size_t p) {
    const auto path = sample_path(spec, static_cast<std::int64_t>(p));
    Word y(spec.x_head.begin(), spec.x_head.begin() + fd);
    double s = 0.0;
    for (std::int64_t n = 0;; ++n) {
      // y = X_n ... X_1 x, truncated to the f depth; s = S_n.
      const TimeFunction& f = spec.f.at(y);
      for (std::size_t k = 0; k < nt; ++k) per_t[k][p] += f(ts[k] - s);
      if (n == spec.n_max) break;
      s += path.interarrivals[static_cast<std::size_t>(n)];
      y.insert(y.begin(), path.letters[static_cast<std::size_t>(n)]);
      y.pop_back();
    }
    if (!(s - slack > t_top - lo) && lo != kInf) short_path[p] = 1;
  });
  if (std::any_of(short_path.begin(), short_path.end(), [](char c) { return c != 0; })) {
    const auto need = required_horizon(spec, t_top);
    throw HorizonError(fmt::format("horizon n_max = {} does not reach t = {}; use n_max >= {}", spec.n_max, t_top, need),
                       need);
  }

  std::vector<EmpiricalValue> out;
  const double n = static_cast<double>(np);
  std::vector<double> dev(np);
  for (std::size_t k = 0; k < nt; ++k) {
    const double mean = pairwise_sum(per_t[k]) / n;
    for (std::size_t p = 0; p < np; ++p) dev[p] = (per_t[k][p] - mean) * (per_t[k][p] - mean);
    const double var = pairwise_sum(dev) / (n - 1.0);
    out.push_back({ts[k], mean, std::sqrt(var / n)});
  }
  return out;
}

EmpiricalValue empirical_N(const SimulationSpec& spec, double t) {
  return empirical_N(spec, std::span<const double>(&t, 1)).front();
}

}  // namespace rpf
