#include "rpf/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "rpf/errors.hpp"
#include "rpf/parallel.hpp"

namespace rpf {

FFamily::FFamily(const Subshift& shift, int depth, std::vector<TimeFunction> functions)
    : index_(std::make_shared<const CylinderIndex>(shift, depth)), functions_(std::move(functions)) {
  if (functions_.size() != index_->size())
    throw InputError(fmt::format("f family of depth {} needs {} functions, got {}", depth, index_->size(),
                                 functions_.size()));
}

FFamily FFamily::uniform(const Subshift& shift, TimeFunction f) {
  return FFamily(shift, 1, std::vector<TimeFunction>(static_cast<std::size_t>(shift.alphabet_size()), f));
}

int RenewalProblem::state_depth() const {
  return std::max({eta.depth() - 1, xi.depth() - 1, chi.depth(), f.depth(), 1});
}

void RenewalProblem::validate() const {
  const Subshift& s = shift();
  if (!(eta.shift() == s) || !(chi.shift() == s) || !(f.index().shift() == s))
    throw InputError("eta, xi, chi and f must live on the same subshift");
  for (double v : chi.values())
    if (v < 0.0) throw InputError("chi must be nonnegative");
  const int m = state_depth();
  if (static_cast<int>(x_head.size()) < m)
    throw InputError(fmt::format("base word needs at least {} letters, got {}", m, x_head.size()));
  if (!s.admissible(x_head)) throw InputError("base word is not admissible");
}

ProblemAnalysis analyze(const RenewalProblem& problem, double tol) {
  problem.validate();
  ProblemAnalysis a;
  a.positivity = check_eventually_positive(problem.xi);
  if (!a.positivity.eventually_positive)
    throw PreconditionError(fmt::format("xi is not eventually positive (minimum cycle mean {})", a.positivity.kappa));
  a.delta = solve_delta(problem.eta, problem.xi, 0, tol);
  a.lattice = problem.lattice ? *problem.lattice : detect_lattice(problem.xi);
  return a;
}

RenewalEvaluator::RenewalEvaluator(const RenewalProblem& problem) : problem_(problem) {
  problem_.validate();
  m_ = problem_.state_depth();
  const Subshift& shift = problem_.shift();
  states_ = std::make_shared<const CylinderIndex>(shift, m_);
  const auto& xi = problem_.xi;
  const auto& eta = problem_.eta;

  xi_values_.assign(xi.values().begin(), xi.values().end());
  std::sort(xi_values_.begin(), xi_values_.end());
  xi_values_.erase(std::unique(xi_values_.begin(), xi_values_.end()), xi_values_.end());

  const std::size_t k = states_->size();
  steps_.resize(k);
  chi_.resize(k);
  f_index_.resize(k);
  Word jw(static_cast<std::size_t>(m_) + 1);
  for (std::size_t i = 0; i < k; ++i) {
    const Word& w = states_->word(i);
    chi_[i] = problem_.chi.eval(w);
    f_index_[i] = problem_.f.index().index_of(w);
    std::copy(w.begin(), w.end(), jw.begin() + 1);
    for (int j = 0; j < shift.alphabet_size(); ++j) {
      if (!shift.allowed(j, w.front())) continue;
      jw[0] = j;
      const double xv = xi.eval(jw);
      const auto pos = std::lower_bound(xi_values_.begin(), xi_values_.end(), xv) - xi_values_.begin();
      steps_[i].push_back({static_cast<int>(states_->index_of(jw)), eta.eval(jw), static_cast<int>(pos)});
    }
  }
  chi_max_ = *std::max_element(chi_.begin(), chi_.end());

  const auto pos = check_eventually_positive(xi);
  if (!pos.eventually_positive)
    throw PreconditionError(fmt::format("xi is not eventually positive (minimum cycle mean {})", pos.kappa));
  const CylinderIndex nodes(shift, pos.graph_depth);
  const double phi_max = *std::max_element(pos.node_potential.begin(), pos.node_potential.end());
  lower_shift_.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    lower_shift_[i] = pos.node_potential[nodes.index_of(states_->word(i))] - phi_max - pos.kappa0 * 1e-12;

  const auto& fs = problem_.f.functions();
  all_zero_ = chi_max_ == 0.0 || std::all_of(fs.begin(), fs.end(), [](const TimeFunction& f) { return f.is_zero(); });
  if (all_zero_) return;

  t_lo_ = kInf;
  for (const auto& f : fs) t_lo_ = std::min(t_lo_, f.support_lo());
  support_mode_ = t_lo_ > -kInf;
  if (support_mode_) return;

  // Exponential lower tails: pick a common rate r > delta.
  const double delta = solve_delta(eta, xi).delta;
  double r_sup = kInf;
  bool strict = false;
  for (const auto& f : fs) {
    const double r = f.lower_rate_sup();
    if (r < r_sup) {
      r_sup = r;
      strict = f.lower_rate_strict();
    } else if (r == r_sup) {
      strict = strict || f.lower_rate_strict();
    }
  }
  if (!(r_sup > delta))
    throw UnsupportedInput(fmt::format("the lower tail of f decays at rate {} which does not exceed delta = {}; "
                                       "the series tail cannot be bounded",
                                       r_sup, delta));
  const double r = strict ? 0.5 * (r_sup + delta) : r_sup;
  TailBound tb{kInf, r, 0.0};
  for (const auto& f : fs) {
    const auto b = f.lower_tail(r);
    if (!b) throw UnsupportedInput("no lower tail bound for an f member");
    tb.anchor = std::min(tb.anchor, b->anchor);
    tb.constant = std::max(tb.constant, b->constant);
  }
  tail_ = tb;

  // sum_{k >= 1} T_r^k 1 = (I - T_r)^{-1} T_r 1.
  const TransferMatrix tr(combine(1.0, eta, -r, xi), m_);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (const auto& e : tr.row(i)) {
      a(static_cast<Eigen::Index>(i), e.col) -= e.value;
      rhs(static_cast<Eigen::Index>(i)) += e.value;
    }
  const Eigen::VectorXd b = a.partialPivLu().solve(rhs);
  resolvent_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double v = b(static_cast<Eigen::Index>(i));
    if (!std::isfinite(v) || v < -1e-12 * (1.0 + std::abs(v)))
      throw NumericalError("tail resolvent is not a nonnegative vector");
    resolvent_[i] = std::max(v, 0.0);
  }
}

namespace {

struct Key {
  int state;
  std::vector<int> counts;
  bool operator<(const Key& o) const { return state != o.state ? state < o.state : counts < o.counts; }
};

}  // namespace

EvalResult RenewalEvaluator::eval_at(double t, const Word& x_head, const EvalOptions& opts) const {
  if (!std::isfinite(t)) throw InputError("t must be finite");
  if (!(opts.tol > 0.0)) throw InputError("tolerance must be positive");
  if (static_cast<int>(x_head.size()) < m_)
    throw InputError(fmt::format("base word needs at least {} letters, got {}", m_, x_head.size()));
  if (!problem_.shift().admissible(x_head)) throw InputError("base word is not admissible");
  EvalResult res;
  if (all_zero_) return res;

  const auto& fs = problem_.f.functions();
  const std::size_t nv = xi_values_.size();
  auto sum_of = [&](const std::vector<int>& c) {
    double s = 0.0;
    for (std::size_t v = 0; v < nv; ++v) s += c[v] * xi_values_[v];
    return s;
  };

  std::map<Key, double> level;
  level.emplace(Key{static_cast<int>(states_->index_of(x_head)), std::vector<int>(nv, 0)}, 1.0);
  std::vector<double> level_sums;

  for (int n = 0;; ++n) {
    if (n >= opts.max_levels)
      throw NumericalError(fmt::format("renewal series did not terminate within {} levels", opts.max_levels));
    res.max_keys = std::max(res.max_keys, level.size());
    if (level.size() > opts.max_keys)
      throw UnsupportedInput(fmt::format("renewal series needs more than {} aggregated preimage classes", opts.max_keys));

    std::vector<std::pair<const Key*, double>> keys;
    keys.reserve(level.size());
    for (const auto& [key, w] : level) keys.emplace_back(&key, w);
    std::vector<double> sums(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) sums[i] = sum_of(keys[i].first->counts);

    std::vector<double> contrib(keys.size(), 0.0);
    parallel_for(keys.size(), [&](std::size_t i) {
      const int st = keys[i].first->state;
      if (chi_[st] == 0.0) return;
      const double fv = fs[f_index_[st]].eval(t - sums[i]);
      contrib[i] = keys[i].second * chi_[st] * (opts.absolute ? std::abs(fv) : fv);
    });
    level_sums.push_back(pairwise_sum(contrib));
    res.levels = n + 1;

    const bool exp_mode = !support_mode_;
    if (exp_mode) {
      bool past = true;
      for (std::size_t i = 0; i < keys.size() && past; ++i)
        past = t - sums[i] - lower_shift_[keys[i].first->state] < tail_->anchor;
      if (past) {
        std::vector<double> terms(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
          const double w = keys[i].second;
          const int st = keys[i].first->state;
          terms[i] = w > 0.0 && resolvent_[st] > 0.0
                         ? std::exp(std::log(w) + tail_->rate * (t - sums[i]) + std::log(resolvent_[st]))
                         : 0.0;
        }
        const double tail = tail_->constant * chi_max_ * pairwise_sum(terms);
        if (tail <= opts.tol) {
          res.tail_bound = tail;
          break;
        }
      }
    }

    std::map<Key, double> next;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const auto& [key, w] = keys[i];
      if (w == 0.0) continue;
      if (!exp_mode) {
        const double margin = 1e-12 * (1.0 + std::abs(t) + std::abs(sums[i]));
        if (sums[i] + lower_shift_[key->state] > t - t_lo_ + margin) continue;
      }
      for (const auto& step : steps_[key->state]) {
        Key nk{step.next, key->counts};
        ++nk.counts[step.xi_index];
        next[std::move(nk)] += w * std::exp(step.eta);
      }
    }
    if (next.empty()) break;
    level = std::move(next);
  }
  res.value = pairwise_sum(level_sums);
  return res;
}

EvalResult RenewalEvaluator::eval(double t, const EvalOptions& opts) const {
  return eval_at(t, problem_.x_head, opts);
}

EvalResult eval_N(const RenewalProblem& problem, double t, double tol) {
  EvalOptions opts;
  opts.tol = tol;
  return RenewalEvaluator(problem).eval(t, opts);
}

}  // namespace rpf
