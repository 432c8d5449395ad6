#pragma once

// JSON ingestion for the command-line tool and a 17-digit JSON/CSV writer.
//
// Problem file:
//   {
//     "shift":     {"M": 2, "A": [[1,1],[1,0]]},
//     "potentials": {"xi": <potential>, "eta": <potential>, "chi": <potential>, ...},
//     "f_family":  <time function> | {"depth": d, "functions": {"12": <time function>, ...}},
//     "x_head":    "12",
//     "lattice":   {"span": a, "zeta": <potential>, "psi": <potential>},
//     "options":   {"tol": 1e-10, "depth": 0, "seed": 0, "n_max": 1000, "n_paths": 10000},
//     "description": "free text"
//   }
//
// Potential: {"depth": d, "values": {"word": v, ...}} (every admissible word
// listed), {"depth": d, "values": [v, ...]} in lexicographic order, or
// {"constant": c}.
//
// Time function: "heaviside", "zero", "gasket" (optionally "builtin:"
// prefixed), {"indicator": [a, b]}, {"exp_decay": {"rate": r, "c": c}},
// {"pieces": [{"from": a, "to": b, "terms": [{"c":, "p":, "q":}]}]} or
// {"grid": {"t0":, "dt":, "values": [...]}}. Interval ends may be the
// strings "inf" / "-inf".

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpf/classical.hpp"
#include "rpf/potential.hpp"
#include "rpf/renewal.hpp"
#include "rpf/symbolic.hpp"
#include "rpf/time_function.hpp"

namespace rpf::cli {

using Json = nlohmann::json;

/// Schema violation at a JSON pointer.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// ptr + "/" + escaped key.
std::string child(const std::string& ptr, const std::string& key);
std::string child(const std::string& ptr, std::size_t index);

Json read_json_file(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& origin);

Subshift parse_subshift(const Json& j, const std::string& ptr);
Potential parse_potential(const Json& j, const Subshift& shift, const std::string& ptr);
TimeFunction parse_time_function(const Json& j, const std::string& ptr);
FFamily parse_ffamily(const Json& j, const Subshift& shift, const std::string& ptr);
Word parse_word_json(const Json& j, int alphabet_size, const std::string& ptr);

struct Options {
  std::optional<double> tol;
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> n_max;
  std::optional<std::int64_t> n_paths;
};

struct ProblemFile {
  Subshift shift;
  std::map<std::string, Potential> potentials;
  std::optional<FFamily> f;
  std::optional<Word> x_head;
  std::optional<LatticeReport> lattice;
  Options options;

  /// Named potential; eta defaults to 0 and chi to 1.
  Potential potential(const std::string& name) const;
  /// Requires xi, f_family and x_head.
  RenewalProblem renewal_problem() const;
};

ProblemFile parse_problem(const Json& j);

/// {"p": [...], "s": [...], "z": <time function>}
KeyRenewalSpec parse_key_spec(const Json& j);
/// {"A": [[...]], "eta": [[...]], "xi": [[...]], "f": [<time function>, ...]}
/// with A[j][i] = 1 when the word "ji" is admissible; entries of eta and xi
/// at forbidden words may be null.
MarkovRenewalSpec parse_markov_spec(const Json& j);

/// "a,b,c" or "start:stop:count" (count points, both ends included).
std::vector<double> parse_grid(const std::string& text);

/// %.17g for finite doubles, null otherwise.
std::string format_double(double v);
/// JSON text with every float at 17 significant digits and non-finite
/// values as null. indent < 0 gives the compact form.
std::string dump_json(const Json& j, int indent = 2);
/// Finite doubles as numbers, non-finite as null.
Json number(double v);

/// Writes a CSV header and rows of doubles at 17 significant digits.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace rpf::cli
