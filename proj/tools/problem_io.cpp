#include "problem_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "rpf/errors.hpp"

namespace rpf::cli {

namespace {

const char* type_name(const Json& j) { return j.type_name(); }

void expect_object(const Json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw SchemaError(ptr, fmt::format("expected an object, got {}", type_name(j)));
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!keys.contains(item.key())) throw SchemaError(child(ptr, item.key()), "unknown key");
}

const Json& require(const Json& j, const std::string& ptr, const char* key) {
  if (!j.contains(key)) throw SchemaError(child(ptr, key), "missing required key");
  return j.at(key);
}

double get_number(const Json& j, const std::string& ptr, bool allow_inf = false) {
  if (j.is_number()) return j.get<double>();
  if (allow_inf && j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw SchemaError(ptr, fmt::format("expected a number{}, got {}", allow_inf ? " or \"inf\"/\"-inf\"" : "",
                                     type_name(j)));
}

std::int64_t get_int(const Json& j, const std::string& ptr) {
  if (!j.is_number_integer()) throw SchemaError(ptr, fmt::format("expected an integer, got {}", type_name(j)));
  return j.get<std::int64_t>();
}

std::vector<double> get_number_array(const Json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError(ptr, fmt::format("expected an array, got {}", type_name(j)));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], child(ptr, i)));
  return out;
}

// Runs fn, reporting library input errors at ptr.
template <typename Fn>
auto at_pointer(const std::string& ptr, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw SchemaError(ptr, e.what());
  }
}

void write_json(std::string& out, const Json& j, int indent, int level) {
  const auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += Json(item.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write_json(out, item.value(), indent, level + 1);
      }
      newline(level);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat && indent >= 0 ? ", " : ",";
        if (!flat) newline(level + 1);
        write_json(out, j[i], indent, level + 1);
      }
      if (!flat) newline(level);
      out += ']';
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string child(const std::string& ptr, const std::string& key) {
  std::string esc;
  for (char c : key) {
    if (c == '~')
      esc += "~0";
    else if (c == '/')
      esc += "~1";
    else
      esc += c;
  }
  return ptr + "/" + esc;
}

std::string child(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", fmt::format("{} is not valid JSON: {}", origin, e.what()));
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", fmt::format("cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), "'" + path + "'");
}

Subshift parse_subshift(const Json& j, const std::string& ptr) {
  expect_object(j, ptr, {"M", "A"});
  const auto m = get_int(require(j, ptr, "M"), child(ptr, "M"));
  if (m < 2) throw SchemaError(child(ptr, "M"), "alphabet size must be at least 2");
  if (!j.contains("A")) return Subshift::full(static_cast<int>(m));
  const auto& a = j.at("A");
  const auto pa = child(ptr, "A");
  if (!a.is_array() || static_cast<std::int64_t>(a.size()) != m)
    throw SchemaError(pa, fmt::format("expected an array of {} rows", m));
  IncidenceMatrix mat;
  for (std::size_t r = 0; r < a.size(); ++r) {
    const auto pr = child(pa, r);
    if (!a[r].is_array() || static_cast<std::int64_t>(a[r].size()) != m)
      throw SchemaError(pr, fmt::format("expected a row of {} entries", m));
    std::vector<int> row;
    for (std::size_t c = 0; c < a[r].size(); ++c) {
      const auto v = get_int(a[r][c], child(pr, c));
      if (v != 0 && v != 1) throw SchemaError(child(pr, c), "entries must be 0 or 1");
      row.push_back(static_cast<int>(v));
    }
    mat.push_back(std::move(row));
  }
  return at_pointer(pa, [&] { return Subshift(std::move(mat)); });
}

Word parse_word_json(const Json& j, int alphabet_size, const std::string& ptr) {
  if (j.is_string()) return at_pointer(ptr, [&] { return parse_word(j.get<std::string>(), alphabet_size); });
  if (j.is_array()) {
    Word w;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const auto v = get_int(j[i], child(ptr, i));
      if (v < 1 || v > alphabet_size) throw SchemaError(child(ptr, i), fmt::format("letter outside 1..{}", alphabet_size));
      w.push_back(static_cast<int>(v - 1));
    }
    if (w.empty()) throw SchemaError(ptr, "empty word");
    return w;
  }
  throw SchemaError(ptr, fmt::format("expected a word string or array of letters, got {}", type_name(j)));
}

Potential parse_potential(const Json& j, const Subshift& shift, const std::string& ptr) {
  if (j.is_object() && j.contains("constant")) {
    expect_object(j, ptr, {"constant"});
    return Potential::constant(shift, get_number(j.at("constant"), child(ptr, "constant")));
  }
  expect_object(j, ptr, {"depth", "values"});
  const auto depth = get_int(require(j, ptr, "depth"), child(ptr, "depth"));
  if (depth < 1 || depth > 12) throw SchemaError(child(ptr, "depth"), "depth must lie in 1..12");
  const auto words = admissible_words(shift, static_cast<int>(depth));
  const auto& vals = require(j, ptr, "values");
  const auto pv = child(ptr, "values");
  std::vector<double> values(words.size(), 0.0);
  if (vals.is_array()) {
    if (vals.size() != words.size())
      throw SchemaError(pv, fmt::format("expected {} values (one per admissible word of length {})", words.size(), depth));
    for (std::size_t i = 0; i < vals.size(); ++i) values[i] = get_number(vals[i], child(pv, i));
  } else if (vals.is_object()) {
    const CylinderIndex index(shift, static_cast<int>(depth));
    std::vector<char> seen(words.size(), 0);
    for (const auto& item : vals.items()) {
      const auto pk = child(pv, item.key());
      const Word w = at_pointer(pk, [&] { return parse_word(item.key(), shift.alphabet_size()); });
      if (static_cast<std::int64_t>(w.size()) != depth)
        throw SchemaError(pk, fmt::format("word length {} differs from depth {}", w.size(), depth));
      const auto idx = index.find(w);
      if (!idx) throw SchemaError(pk, "word is not admissible");
      if (seen[*idx]) throw SchemaError(pk, "duplicate word");
      seen[*idx] = 1;
      values[*idx] = get_number(item.value(), pk);
    }
    for (std::size_t i = 0; i < words.size(); ++i)
      if (!seen[i]) throw SchemaError(child(pv, format_word(words[i], shift.alphabet_size())), "missing value");
  } else {
    throw SchemaError(pv, fmt::format("expected an object or array, got {}", type_name(vals)));
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) throw SchemaError(child(pv, i), "value is not finite");
  return at_pointer(ptr, [&] { return Potential(shift, static_cast<int>(depth), std::move(values)); });
}

TimeFunction parse_time_function(const Json& j, const std::string& ptr) {
  if (j.is_string()) {
    std::string name = j.get<std::string>();
    if (name.starts_with("builtin:")) name = name.substr(8);
    return at_pointer(ptr, [&] { return TimeFunction::builtin(name); });
  }
  if (!j.is_object() || j.size() != 1)
    throw SchemaError(ptr, "expected a builtin name or an object with exactly one of "
                           "indicator, exp_decay, pieces, grid");
  const auto& [key, val] = *j.items().begin();
  const auto pk = child(ptr, key);
  if (key == "indicator") {
    if (!val.is_array() || val.size() != 2) throw SchemaError(pk, "expected [a, b]");
    const double a = get_number(val[0], child(pk, 0), true), b = get_number(val[1], child(pk, 1), true);
    return at_pointer(pk, [&] { return TimeFunction::indicator(a, b); });
  }
  if (key == "exp_decay") {
    expect_object(val, pk, {"rate", "c"});
    const double rate = get_number(require(val, pk, "rate"), child(pk, "rate"));
    const double c = val.contains("c") ? get_number(val.at("c"), child(pk, "c")) : 1.0;
    return at_pointer(pk, [&] { return TimeFunction::exp_decay(rate, c); });
  }
  if (key == "pieces") {
    if (!val.is_array()) throw SchemaError(pk, "expected an array of pieces");
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < val.size(); ++i) {
      const auto pp = child(pk, i);
      expect_object(val[i], pp, {"from", "to", "terms"});
      Piece piece;
      piece.from = val[i].contains("from") ? get_number(val[i].at("from"), child(pp, "from"), true) : -kInf;
      piece.to = val[i].contains("to") ? get_number(val[i].at("to"), child(pp, "to"), true) : kInf;
      const auto& terms = require(val[i], pp, "terms");
      const auto pt = child(pp, "terms");
      if (!terms.is_array()) throw SchemaError(pt, "expected an array of terms");
      for (std::size_t k = 0; k < terms.size(); ++k) {
        const auto ptk = child(pt, k);
        expect_object(terms[k], ptk, {"c", "p", "q"});
        ExpTerm term;
        term.c = get_number(require(terms[k], ptk, "c"), child(ptk, "c"));
        if (terms[k].contains("p")) {
          const auto p = get_int(terms[k].at("p"), child(ptk, "p"));
          if (p < 0 || p > 64) throw SchemaError(child(ptk, "p"), "power must lie in 0..64");
          term.p = static_cast<int>(p);
        }
        if (terms[k].contains("q")) term.q = get_number(terms[k].at("q"), child(ptk, "q"));
        piece.terms.push_back(term);
      }
      pieces.push_back(std::move(piece));
    }
    return at_pointer(pk, [&] { return TimeFunction::piecewise(std::move(pieces)); });
  }
  if (key == "grid") {
    expect_object(val, pk, {"t0", "dt", "values"});
    const double t0 = get_number(require(val, pk, "t0"), child(pk, "t0"));
    const double dt = get_number(require(val, pk, "dt"), child(pk, "dt"));
    auto values = get_number_array(require(val, pk, "values"), child(pk, "values"));
    return at_pointer(pk, [&] { return TimeFunction::grid(t0, dt, std::move(values)); });
  }
  throw SchemaError(pk, "unknown time function kind");
}

FFamily parse_ffamily(const Json& j, const Subshift& shift, const std::string& ptr) {
  if (!(j.is_object() && j.contains("functions"))) return FFamily::uniform(shift, parse_time_function(j, ptr));
  expect_object(j, ptr, {"depth", "functions"});
  const auto depth = get_int(require(j, ptr, "depth"), child(ptr, "depth"));
  if (depth < 1 || depth > 12) throw SchemaError(child(ptr, "depth"), "depth must lie in 1..12");
  const auto& fs = j.at("functions");
  const auto pf = child(ptr, "functions");
  if (!fs.is_object()) throw SchemaError(pf, "expected an object keyed by word");
  const CylinderIndex index(shift, static_cast<int>(depth));
  std::vector<std::optional<TimeFunction>> slots(index.size());
  for (const auto& item : fs.items()) {
    const auto pk = child(pf, item.key());
    const Word w = at_pointer(pk, [&] { return parse_word(item.key(), shift.alphabet_size()); });
    const auto idx = static_cast<std::int64_t>(w.size()) == depth ? index.find(w) : std::nullopt;
    if (!idx) throw SchemaError(pk, fmt::format("not an admissible word of length {}", depth));
    if (slots[*idx]) throw SchemaError(pk, "duplicate word");
    slots[*idx] = parse_time_function(item.value(), pk);
  }
  std::vector<TimeFunction> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) throw SchemaError(child(pf, format_word(index.word(i), shift.alphabet_size())), "missing function");
    out.push_back(std::move(*slots[i]));
  }
  return at_pointer(ptr, [&] { return FFamily(shift, static_cast<int>(depth), std::move(out)); });
}

Potential ProblemFile::potential(const std::string& name) const {
  if (auto it = potentials.find(name); it != potentials.end()) return it->second;
  if (name == "eta") return Potential::constant(shift, 0.0);
  if (name == "chi") return Potential::constant(shift, 1.0);
  throw SchemaError(child("/potentials", name), "missing required potential");
}

RenewalProblem ProblemFile::renewal_problem() const {
  if (!f) throw SchemaError("/f_family", "missing required key");
  if (!x_head) throw SchemaError("/x_head", "missing required key");
  RenewalProblem p{potential("eta"), potential("xi"), potential("chi"), *f, *x_head, lattice};
  at_pointer("", [&] {
    p.validate();
    return 0;
  });
  return p;
}

ProblemFile parse_problem(const Json& j) {
  expect_object(j, "", {"shift", "potentials", "f_family", "x_head", "lattice", "options", "description"});
  ProblemFile pf{parse_subshift(require(j, "", "shift"), "/shift"), {}, {}, {}, {}, {}};
  if (j.contains("description") && !j.at("description").is_string())
    throw SchemaError("/description", "expected a string");
  if (j.contains("potentials")) {
    const auto& pots = j.at("potentials");
    if (!pots.is_object()) throw SchemaError("/potentials", "expected an object of named potentials");
    for (const auto& item : pots.items())
      pf.potentials.emplace(item.key(), parse_potential(item.value(), pf.shift, child("/potentials", item.key())));
  }
  if (j.contains("f_family")) pf.f = parse_ffamily(j.at("f_family"), pf.shift, "/f_family");
  if (j.contains("x_head")) {
    pf.x_head = parse_word_json(j.at("x_head"), pf.shift.alphabet_size(), "/x_head");
    if (!pf.shift.admissible(*pf.x_head)) throw SchemaError("/x_head", "word is not admissible");
  }
  if (j.contains("lattice")) {
    const auto& l = j.at("lattice");
    expect_object(l, "/lattice", {"span", "zeta", "psi"});
    const double span = get_number(require(l, "/lattice", "span"), "/lattice/span");
    const auto zeta = parse_potential(require(l, "/lattice", "zeta"), pf.shift, "/lattice/zeta");
    const auto psi = parse_potential(require(l, "/lattice", "psi"), pf.shift, "/lattice/psi");
    pf.lattice = at_pointer("/lattice", [&] { return lattice_from_cohomology(pf.potential("xi"), span, zeta, psi); });
  }
  if (j.contains("options")) {
    const auto& o = j.at("options");
    expect_object(o, "/options", {"tol", "depth", "seed", "n_max", "n_paths"});
    if (o.contains("tol")) {
      const double tol = get_number(o.at("tol"), "/options/tol");
      if (!(tol > 0.0)) throw SchemaError("/options/tol", "must be positive");
      pf.options.tol = tol;
    }
    if (o.contains("depth")) {
      const auto d = get_int(o.at("depth"), "/options/depth");
      if (d < 0 || d > 16) throw SchemaError("/options/depth", "must lie in 0..16");
      pf.options.depth = static_cast<int>(d);
    }
    if (o.contains("seed")) {
      if (!o.at("seed").is_number_unsigned()) throw SchemaError("/options/seed", "expected a nonnegative integer");
      pf.options.seed = o.at("seed").get<std::uint64_t>();
    }
    if (o.contains("n_max")) pf.options.n_max = get_int(o.at("n_max"), "/options/n_max");
    if (o.contains("n_paths")) pf.options.n_paths = get_int(o.at("n_paths"), "/options/n_paths");
  }
  return pf;
}

KeyRenewalSpec parse_key_spec(const Json& j) {
  expect_object(j, "", {"p", "s", "z", "description"});
  KeyRenewalSpec spec{get_number_array(require(j, "", "p"), "/p"), get_number_array(require(j, "", "s"), "/s"),
                      parse_time_function(require(j, "", "z"), "/z")};
  at_pointer("", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

MarkovRenewalSpec parse_markov_spec(const Json& j) {
  expect_object(j, "", {"A", "eta", "xi", "f", "description"});
  const Subshift shift = parse_subshift(Json{{"M", require(j, "", "A").size()}, {"A", j.at("A")}}, "");
  const int m = shift.alphabet_size();
  auto matrix = [&](const char* key) {
    const auto p = child("", key);
    const auto& a = require(j, "", key);
    if (!a.is_array() || static_cast<int>(a.size()) != m) throw SchemaError(p, fmt::format("expected {} rows", m));
    std::vector<std::vector<double>> out(m, std::vector<double>(m, 0.0));
    for (int r = 0; r < m; ++r) {
      const auto pr = child(p, static_cast<std::size_t>(r));
      if (!a[r].is_array() || static_cast<int>(a[r].size()) != m)
        throw SchemaError(pr, fmt::format("expected a row of {} entries", m));
      for (int c = 0; c < m; ++c) {
        if (a[r][c].is_null() && !shift.allowed(r, c)) continue;
        out[r][c] = get_number(a[r][c], child(pr, static_cast<std::size_t>(c)));
      }
    }
    return out;
  };
  MarkovRenewalSpec spec{shift.matrix(), matrix("eta"), matrix("xi"), {}};
  const auto& fs = require(j, "", "f");
  if (!fs.is_array() || static_cast<int>(fs.size()) != m)
    throw SchemaError("/f", fmt::format("expected {} time functions", m));
  for (std::size_t i = 0; i < fs.size(); ++i) spec.f.push_back(parse_time_function(fs[i], child("/f", i)));
  at_pointer("", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

std::vector<double> parse_grid(const std::string& text) {
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
      throw InputError(fmt::format("malformed number '{}' in grid '{}'", s, text));
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::size_t start = 0;
  while (true) {
    const auto end = text.find(sep, start);
    parts.push_back(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  std::vector<double> out;
  if (sep == ':') {
    if (parts.size() != 3) throw InputError(fmt::format("grid '{}' must be start:stop:count", text));
    const double a = to_double(parts[0]), b = to_double(parts[1]);
    const double n = to_double(parts[2]);
    if (n < 1 || n != std::floor(n) || n > 1e7) throw InputError(fmt::format("bad point count in grid '{}'", text));
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
  }
  for (const auto& p : parts) out.push_back(to_double(p));
  return out;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.17g}", v);
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string dump_json(const Json& j, int indent) {
  std::string out;
  write_json(out, j, indent, 0);
  return out;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt::format("{:.17g}", row[i]);
    out << '\n';
  }
}

}  // namespace rpf::cli
