#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "problem_io.hpp"
#include "rpf/acceptance.hpp"
#include "rpf/classical.hpp"
#include "rpf/errors.hpp"
#include "rpf/geometry.hpp"
#include "rpf/parallel.hpp"
#include "rpf/renewal.hpp"
#include "rpf/simulate.hpp"
#include "rpf/spectral.hpp"

namespace rpf::cli {

namespace {

// Bad command-line values (grids, ratios) that CLI11 itself cannot check.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::optional<double> tol;
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct Args {
  std::string file;
  std::string potential = "eta";
  std::optional<double> s;
  std::string t_grid;
  std::string h_grid = "1,0.5,0.25,0.125,0.0625";
  double t_max = 0.0;
  int points = 4097;
  int samples = 0;
  std::string ratios;
  std::string gamma = "builtin:gasket";
  int dim = 2;
  std::string format = "json";
  std::int64_t paths = 10000;
  std::optional<std::int64_t> n_max;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--tol", c.tol, "Absolute tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--depth", c.depth, "Cylinder depth of the transfer matrix (0 = minimal)")->check(CLI::Range(0, 16));
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--out", c.out, "Write the result to this file instead of standard output");
}

std::vector<double> grid_arg(const std::string& text, const char* flag) {
  try {
    return parse_grid(text);
  } catch (const InputError& e) {
    throw UsageError(fmt::format("{}: {}", flag, e.what()));
  }
}

Json word_map(const CylinderIndex& index, std::span<const double> values) {
  Json j = Json::object();
  const int m = index.shift().alphabet_size();
  for (std::size_t i = 0; i < index.size(); ++i) j[format_word(index.word(i), m)] = number(values[i]);
  return j;
}

Json array_of(std::span<const double> v) {
  Json j = Json::array();
  for (double x : v) j.push_back(number(x));
  return j;
}

Json span_json(const std::optional<double>& span) { return span ? number(*span) : Json(nullptr); }

double tol_or(const Common& c, const ProblemFile& pf, double fallback) {
  return c.tol.value_or(pf.options.tol.value_or(fallback));
}

int depth_or(const Common& c, const ProblemFile& pf) { return c.depth.value_or(pf.options.depth.value_or(0)); }

// Subcommand bodies. Each returns the text to emit.

std::string cmd_spectral(const Args& a, const Common& c) {
  const auto pf = parse_problem(read_json_file(a.file));
  const auto phi = pf.potential(a.potential);
  const auto d = spectral_data(phi, depth_or(c, pf));
  const CylinderIndex& index = *d.index;
  Json words = Json::array();
  for (const auto& w : index.words()) words.push_back(format_word(w, index.shift().alphabet_size()));
  const Json j{{"potential", a.potential},
               {"depth", d.depth()},
               {"cylinders", words},
               {"gamma", number(d.gamma)},
               {"pressure", number(d.pressure)},
               {"gap", number(d.gap)},
               {"h", word_map(index, d.h)},
               {"nu", word_map(index, d.nu)},
               {"mu", word_map(index, d.mu)},
               {"right_residual", number(d.right_residual)},
               {"left_residual", number(d.left_residual)},
               {"iterations", d.iterations}};
  return dump_json(j) + "\n";
}

std::string cmd_delta(const Args& a, const Common& c) {
  const auto pf = parse_problem(read_json_file(a.file));
  const auto r = solve_delta(pf.potential("eta"), pf.potential("xi"), depth_or(c, pf), tol_or(c, pf, 1e-12));
  const Json j{{"delta", number(r.delta)},
               {"pressure_residual", number(r.pressure_residual)},
               {"gamma_residual", number(r.gamma_residual)},
               {"bracket", {number(r.bracket_lo), number(r.bracket_hi)}},
               {"evaluations", r.evaluations}};
  return dump_json(j) + "\n";
}

std::string cmd_pressure(const Args& a, const Common& c) {
  const auto pf = parse_problem(read_json_file(a.file));
  Json j;
  if (a.s) {
    const auto phi = combine(1.0, pf.potential("eta"), -*a.s, pf.potential("xi"));
    j = Json{{"potential", "eta - s*xi"}, {"s", number(*a.s)}, {"pressure", number(pressure(phi, depth_or(c, pf)))}};
  } else {
    j = Json{{"potential", a.potential}, {"pressure", number(pressure(pf.potential(a.potential), depth_or(c, pf)))}};
  }
  return dump_json(j) + "\n";
}

std::string cmd_renewal_eval(const Args& a, const Common& c) {
  const auto pf = parse_problem(read_json_file(a.file));
  const auto ts = grid_arg(a.t_grid, "--t");
  const auto problem = pf.renewal_problem();
  const RenewalEvaluator ev(problem);
  const RenewalAsymptotics as(problem);
  const bool lattice = as.analysis().lattice.kind == LatticeKind::lattice;
  const double delta = as.delta();
  const double g = lattice ? 0.0 : as.G().G;
  EvalOptions opts;
  opts.tol = tol_or(c, pf, 1e-10);
  std::vector<std::vector<double>> rows(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    const auto r = ev.eval(ts[i], opts);
    const double target = lattice ? as.Gtilde(ts[i]).value : g;
    rows[i] = {ts[i], r.value, std::exp(-ts[i] * delta) * r.value, target, r.tail_bound};
  });
  std::ostringstream os;
  write_csv(os, {"t", "N", "scaled_N", "target", "tail_bound"}, rows);
  return os.str();
}

std::string cmd_asymptote(const Args& a, const Common&) {
  const auto pf = parse_problem(read_json_file(a.file));
  const auto problem = pf.renewal_problem();
  const RenewalAsymptotics as(problem);
  const auto& an = as.analysis();
  const auto g = as.G();
  Json j{{"lattice_kind", to_string(an.lattice.kind)},
         {"span", span_json(an.lattice.span)},
         {"delta", number(g.delta)},
         {"G", number(g.G)},
         {"mean", number(g.mean)},
         {"h_x", number(g.h_x)},
         {"time_integrals", array_of(g.time_integrals)},
         {"kappa", number(an.positivity.kappa)},
         {"m_star", an.positivity.m_star}};
  if (an.lattice.kind == LatticeKind::lattice && a.samples > 0) {
    Json table = Json::array();
    for (const auto& [t, v] : lattice_Gtilde_table(problem, a.samples)) table.push_back({number(t), number(v)});
    j["gtilde"] = table;
  }
  return dump_json(j) + "\n";
}

std::string cmd_cesaro(const Args& a, const Common& c) {
  const auto pf = parse_problem(read_json_file(a.file));
  if (!(a.t_max > 0.0)) throw UsageError("--t-max must be positive");
  const auto r = cesaro_average(pf.renewal_problem(), a.t_max, a.points, tol_or(c, pf, 1e-12));
  const Json j{{"t_max", number(r.t_max)},
               {"points", r.points},
               {"value", number(r.value)},
               {"target", number(r.target)},
               {"relative_error", number(r.value / r.target - 1.0)}};
  return dump_json(j) + "\n";
}

std::string cmd_conditions(const Args& a, const Common& c) {
  const auto pf = parse_problem(read_json_file(a.file));
  const auto ts = grid_arg(a.t_grid.empty() ? "-10:20:61" : a.t_grid, "--t");
  const auto hs = grid_arg(a.h_grid, "--mesh");
  const auto r = check_conditions(pf.renewal_problem(), ts, hs, tol_or(c, pf, 1e-10));
  Json rows = Json::array();
  for (const auto& row : r.dri.rows) rows.push_back({{"h", number(row.h)}, {"lower", number(row.lower)}, {"upper", number(row.upper)}});
  const Json j{{"delta", number(r.delta)},
               {"A", {{"holds", r.a_holds}, {"integrals", array_of(r.a_integrals)}}},
               {"B", {{"holds", r.b_holds}, {"constant", number(r.b_constant)}}},
               {"C", {{"holds", r.c_holds}, {"rate", number(r.c_rate)}, {"constant", number(r.c_constant)}, {"points", r.c_points}}},
               {"D",
                {{"holds", r.d_holds},
                 {"monotonic", r.d_monotonic},
                 {"equi_dri", r.d_equi_dri},
                 {"dri", {{"rows", rows}, {"upper_infinite", r.dri.upper_infinite}, {"consistent", r.dri.consistent}}}}},
               {"resolution", r.resolution}};
  return dump_json(j) + "\n";
}

std::string cmd_key(const Args& a, const Common&) {
  const auto spec = parse_key_spec(read_json_file(a.file));
  const auto r = key_renewal_asymptote(spec);
  Json j{{"mean", number(r.mean)},
         {"integral", number(r.integral)},
         {"lattice", r.lattice},
         {"span", span_json(r.span)},
         {"nonlattice_value", number(r.nonlattice_value)},
         {"average", number(r.average)}};
  if (!a.t_grid.empty()) {
    if (!r.lattice) throw WrongTheorem("--t values need lattice interarrival times; the non-lattice limit is constant");
    Json values = Json::array();
    for (double t : grid_arg(a.t_grid, "--t"))
      values.push_back({{"t", number(t)}, {"value", number(key_renewal_lattice_value(spec, t))}});
    j["values"] = values;
  }
  return dump_json(j) + "\n";
}

std::string cmd_markov(const Args& a, const Common& c) {
  const auto spec = parse_markov_spec(read_json_file(a.file));
  const auto r = markov_renewal_G(spec, c.tol.value_or(1e-15));
  const Json j{{"delta", number(r.delta)},
               {"radius_residual", number(r.radius_residual)},
               {"h", array_of(r.h)},
               {"nu", array_of(r.nu)},
               {"G", array_of(r.G)}};
  return dump_json(j) + "\n";
}

std::string cmd_lalley(const Args& a, const Common& c) {
  const auto pf = parse_problem(read_json_file(a.file));
  if (!pf.x_head) throw SchemaError("/x_head", "missing required key");
  const auto ts = grid_arg(a.t_grid, "--t");
  const auto xi = pf.potential("xi");
  const auto chi = pf.potential("chi");
  const RenewalProblem counting{Potential::constant(pf.shift, 0.0), xi, chi,
                                FFamily::uniform(pf.shift, TimeFunction::heaviside()), *pf.x_head, pf.lattice};
  const auto lattice = pf.lattice ? *pf.lattice : detect_lattice(xi);
  const RenewalEvaluator ev(counting);
  EvalOptions opts;
  opts.tol = tol_or(c, pf, 1e-10);
  std::vector<std::vector<double>> rows;
  for (double t : ts) rows.push_back({t, ev.eval(t, opts).value, lalley_counting_asymptote(xi, chi, lattice, *pf.x_head, t)});
  std::ostringstream os;
  write_csv(os, {"t", "N", "asymptote"}, rows);
  return os.str();
}

std::string cmd_minkowski(const Args& a, const Common& c) {
  SelfSimilarSystem sys;
  try {
    for (double r : parse_grid(a.ratios)) sys.ratios.push_back(r);
  } catch (const InputError& e) {
    throw UsageError(fmt::format("--ratios: {}", e.what()));
  }
  sys.ambient_dim = a.dim;
  if (a.gamma.starts_with("builtin:")) {
    try {
      sys.gamma_tube = TimeFunction::builtin(a.gamma.substr(8));
    } catch (const InputError& e) {
      throw UsageError(fmt::format("--gamma: {}", e.what()));
    }
  } else
    sys.gamma_tube = parse_time_function(read_json_file(a.gamma), "");
  try {
    sys.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  const auto r = average_minkowski_content(sys);
  std::vector<std::vector<double>> rows;
  if (!a.t_grid.empty()) {
    const double tol = c.tol.value_or(1e-12);
    const auto problem = tube_problem(sys);
    const RenewalEvaluator ev(problem);
    EvalOptions opts;
    opts.tol = tol;
    const auto ts = grid_arg(a.t_grid, "--t");
    rows.resize(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) {
      const double v = ev.eval(ts[i], opts).value;
      rows[i] = {ts[i], std::exp(-ts[i] * (r.dimension - a.dim)) * v, v};
    });
  }
  if (a.format == "csv") {
    std::ostringstream os;
    write_csv(os, {"t", "scaled_volume", "volume"}, rows);
    return os.str();
  }
  Json j{{"dimension", number(r.dimension)},
         {"lattice_kind", to_string(r.lattice_kind)},
         {"span", span_json(r.span)},
         {"numerator", number(r.numerator)},
         {"denominator", number(r.denominator)},
         {"content", number(r.content)}};
  if (!rows.empty()) {
    Json curve = Json::array();
    for (const auto& row : rows)
      curve.push_back({{"t", number(row[0])}, {"scaled_volume", number(row[1])}, {"volume", number(row[2])}});
    j["curve"] = curve;
  }
  return dump_json(j) + "\n";
}

std::string cmd_simulate(const Args& a, const Common& c) {
  const auto pf = parse_problem(read_json_file(a.file));
  const auto ts = grid_arg(a.t_grid, "--t");
  const auto problem = pf.renewal_problem();
  const std::uint64_t seed = c.seed.value_or(pf.options.seed.value_or(0));
  const std::int64_t paths = pf.options.n_paths && a.paths == Args{}.paths ? *pf.options.n_paths : a.paths;
  auto spec = SimulationSpec::from_problem(problem, 0, paths, seed);
  const double t_top = ts.empty() ? 0.0 : *std::max_element(ts.begin(), ts.end());
  spec.n_max = a.n_max.value_or(pf.options.n_max.value_or(required_horizon(spec, t_top)));
  const auto emp = empirical_N(spec, ts);
  const RenewalEvaluator ev(spec.problem());
  EvalOptions opts;
  opts.tol = tol_or(c, pf, 1e-10);
  std::vector<std::vector<double>> rows;
  for (const auto& e : emp) rows.push_back({e.t, e.mean, e.stderr_, ev.eval(e.t, opts).value});
  std::ostringstream os;
  write_csv(os, {"t", "mean", "stderr", "deterministic_N"}, rows);
  return os.str();
}

std::string cmd_paper_check(bool& all_pass) {
  std::ostringstream os;
  const auto results = run_acceptance();
  int passed = 0;
  for (const auto& r : results) {
    os << format_result(r) << '\n';
    passed += r.pass ? 1 : 0;
  }
  os << fmt::format("{} of {} criteria passed\n", passed, results.size());
  all_pass = passed == static_cast<int>(results.size());
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Renewal theorems for dependent interarrival times via transfer operators", "rpf"};
  app.require_subcommand(1);
  Common c;
  Args a;
  std::string module;
  std::function<std::string()> action;
  bool paper_pass = true;

  auto sub = [&](const char* name, const char* help, const char* mod, auto body, bool needs_file = true) {
    CLI::App* s = app.add_subcommand(name, help);
    if (needs_file) s->add_option("problem", a.file, "Problem JSON file")->required()->check(CLI::ExistingFile);
    add_common(s, c);
    s->callback([&, mod, body] {
      module = mod;
      action = [&, body] { return body(a, c); };
    });
    return s;
  };

  auto* spectral = sub("spectral", "Leading eigendata of a transfer operator", "spectral", cmd_spectral);
  spectral->add_option("--potential", a.potential, "Name of the potential in the problem file");
  sub("delta", "Renewal exponent delta with P(eta - delta xi) = 0", "spectral", cmd_delta);
  auto* pres = sub("pressure", "Topological pressure", "spectral", cmd_pressure);
  pres->add_option("--potential", a.potential, "Name of the potential in the problem file");
  pres->add_option("--s", a.s, "Evaluate P(eta - s xi) instead");
  auto* reval = sub("renewal-eval", "Evaluate N(t, x) on a grid (CSV)", "renewal", cmd_renewal_eval);
  reval->add_option("--t", a.t_grid, "Grid: a,b,c or start:stop:count")->required();
  auto* asym = sub("asymptote", "Asymptotic constant G(x) or the periodic function of the lattice case", "renewal",
                   cmd_asymptote);
  asym->add_option("--samples", a.samples, "Tabulate the lattice function at this many points per period")
      ->check(CLI::Range(0, 100000));
  auto* ces = sub("cesaro", "Cesaro average of e^(-t delta) N", "renewal", cmd_cesaro);
  ces->add_option("--t-max", a.t_max, "Upper end of the averaging window")->required();
  ces->add_option("--points", a.points, "Trapezoid points")->check(CLI::Range(2, 10'000'000));
  auto* cond = sub("conditions", "Sample the regularity conditions", "renewal", cmd_conditions);
  cond->add_option("--t", a.t_grid, "Time grid");
  cond->add_option("--mesh", a.h_grid, "Decreasing Riemann-sum meshes");

  auto* classical = app.add_subcommand("classical", "Classical corollaries");
  classical->require_subcommand(1);
  {
    CLI::App* k = classical->add_subcommand("key", "Key renewal theorem");
    k->add_option("spec", a.file, "Spec JSON {p, s, z}")->required()->check(CLI::ExistingFile);
    k->add_option("--t", a.t_grid, "Lattice case: evaluate the periodic limit on this grid");
    add_common(k, c);
    k->callback([&] {
      module = "classical";
      action = [&] { return cmd_key(a, c); };
    });
    CLI::App* m = classical->add_subcommand("markov", "Markov renewal theorem with point-mass kernels");
    m->add_option("spec", a.file, "Spec JSON {A, eta, xi, f}")->required()->check(CLI::ExistingFile);
    add_common(m, c);
    m->callback([&] {
      module = "classical";
      action = [&] { return cmd_markov(a, c); };
    });
    CLI::App* l = classical->add_subcommand("lalley", "Lattice counting asymptote (CSV)");
    l->add_option("problem", a.file, "Problem JSON file (xi, chi, x_head)")->required()->check(CLI::ExistingFile);
    l->add_option("--t", a.t_grid, "Time grid")->required();
    add_common(l, c);
    l->callback([&] {
      module = "classical";
      action = [&] { return cmd_lalley(a, c); };
    });
  }

  auto* mink = sub("minkowski", "Dimension and average Minkowski content of a self-similar set", "geometry",
                   cmd_minkowski, false);
  mink->add_option("--ratios", a.ratios, "Contraction ratios r1,r2,...")->required();
  mink->add_option("--gamma", a.gamma, "builtin:gasket or a time-function JSON file");
  mink->add_option("--dim", a.dim, "Ambient dimension")->check(CLI::Range(1, 64));
  mink->add_option("--t", a.t_grid, "Tabulate e^(-t(D-d)) times the tube-volume series on this grid");
  mink->add_option("--format", a.format, "json or csv (the curve only)")->check(CLI::IsMember({"json", "csv"}));

  auto* sim = sub("simulate", "Monte-Carlo estimate of N(t, x) (CSV)", "simulate", cmd_simulate);
  sim->add_option("--paths", a.paths, "Number of sample paths")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
  sim->add_option("--t", a.t_grid, "Time grid")->required();
  sim->add_option("--n-max", a.n_max, "Path length (default: the certified horizon)");

  auto* check = app.add_subcommand("paper-check", "Run the acceptance criteria and print a pass/fail table");
  add_common(check, c);
  check->callback([&] {
    module = "acceptance";
    action = [&] { return cmd_paper_check(paper_pass); };
  });

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitSchema;
  }

  std::string text;
  try {
    text = action();
  } catch (const SchemaError& e) {
    err << "schema error at " << (e.pointer().empty() ? "/" : e.pointer()) << ": "
        << std::string(e.what()).substr(e.pointer().size() + 2) << '\n';
    return kExitSchema;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    err << "error [" << module << "]: " << e.what() << '\n';
    return kExitNumerical;
  }

  if (c.out.empty()) {
    out << text;
  } else {
    std::ofstream f(c.out, std::ios::binary | std::ios::trunc);
    if (!f || !(f << text)) {
      err << "usage error: cannot write '" << c.out << "'\n";
      return kExitSchema;
    }
  }
  return paper_pass ? kExitOk : kExitNumerical;
}

}  // namespace rpf::cli
