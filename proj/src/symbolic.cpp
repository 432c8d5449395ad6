#include "rpf/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "rpf/errors.hpp"

namespace rpf {

namespace {

using BoolMatrix = std::vector<std::vector<char>>;

BoolMatrix bool_product(const BoolMatrix& x, const BoolMatrix& y) {
  const std::size_t n = x.size();
  BoolMatrix r(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (x[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (y[k][j]) r[i][j] = 1;
  return r;
}

bool all_positive(const BoolMatrix& x) {
  for (const auto& row : x)
    for (char c : row)
      if (!c) return false;
  return true;
}

void validate_binary_square(const IncidenceMatrix& a) {
  const std::size_t n = a.size();
  if (n == 0) throw InputError("incidence matrix is empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n)
      throw InputError(fmt::format("incidence matrix is not square: row {} has {} entries, expected {}",
                                   i, a[i].size(), n));
    for (int v : a[i])
      if (v != 0 && v != 1)
        throw InputError(fmt::format("incidence matrix entry {} in row {} is not 0/1", v, i));
  }
}

}  // namespace

PrimitivityResult is_primitive(const IncidenceMatrix& a) {
  validate_binary_square(a);
  const std::size_t n = a.size();
  BoolMatrix base(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) base[i][j] = static_cast<char>(a[i][j]);
  const int bound = static_cast<int>((n - 1) * (n - 1) + 1);
  BoolMatrix power = base;
  for (int p = 1; p <= bound; ++p) {
    if (all_positive(power)) return {true, p};
    power = bool_product(power, base);
  }
  return {false, std::nullopt};
}

Subshift::Subshift(IncidenceMatrix a) : m_(static_cast<int>(a.size())), a_(std::move(a)) {
  validate_binary_square(a_);
  if (m_ < 2) throw InputError(fmt::format("alphabet size must be at least 2, got {}", m_));
  if (!is_primitive(a_).primitive)
    throw InputError("incidence matrix is not primitive (irreducible-periodic and reducible shifts are rejected)");
}

Subshift Subshift::full(int alphabet_size) {
  if (alphabet_size < 2) throw InputError(fmt::format("alphabet size must be at least 2, got {}", alphabet_size));
  return Subshift(IncidenceMatrix(alphabet_size, std::vector<int>(alphabet_size, 1)));
}

bool Subshift::is_full() const {
  for (const auto& row : a_)
    for (int v : row)
      if (!v) return false;
  return true;
}

bool Subshift::admissible(std::span<const int> w) const {
  for (int letter : w)
    if (letter < 0 || letter >= m_) return false;
  for (std::size_t k = 0; k + 1 < w.size(); ++k)
    if (!allowed(w[k], w[k + 1])) return false;
  return true;
}

std::vector<Word> admissible_words(const Subshift& shift, int n) {
  if (n <= 0) throw InputError(fmt::format("word length must be positive, got {}", n));
  std::vector<Word> level;
  for (int i = 0; i < shift.alphabet_size(); ++i) level.push_back({i});
  for (int len = 2; len <= n; ++len) {
    std::vector<Word> next;
    for (const auto& w : level)
      for (int j = 0; j < shift.alphabet_size(); ++j)
        if (shift.allowed(w.back(), j)) {
          Word e = w;
          e.push_back(j);
          next.push_back(std::move(e));
        }
    level = std::move(next);
  }
  return level;
}

std::vector<Word> preimage_prefixes(const Subshift& shift, const Word& x_head, int n) {
  if (x_head.empty()) throw InputError("base word must be nonempty");
  if (!shift.admissible(x_head)) throw InputError("base word is not admissible");
  if (n < 0) throw InputError(fmt::format("prefix length must be nonnegative, got {}", n));
  if (n == 0) return {Word{}};
  std::vector<Word> out;
  for (auto& u : admissible_words(shift, n))
    if (shift.allowed(u.back(), x_head.front())) out.push_back(std::move(u));
  return out;
}

// ---------------------------------------------------------------------------

CylinderIndex::CylinderIndex(Subshift shift, int depth) : shift_(std::move(shift)), depth_(depth) {
  if (depth < 1) throw InputError(fmt::format("cylinder depth must be positive, got {}", depth));
  words_ = admissible_words(shift_, depth);
  const double full = std::pow(static_cast<double>(shift_.alphabet_size()), depth);
  if (full > 1.8e19) throw UnsupportedInput("cylinder depth too large to index");
  if (full <= static_cast<double>(1 << 22)) {
    dense_.assign(static_cast<std::size_t>(full), -1);
    for (std::size_t i = 0; i < words_.size(); ++i) dense_[code(words_[i])] = static_cast<std::int32_t>(i);
  } else {
    for (std::size_t i = 0; i < words_.size(); ++i) sparse_.emplace(code(words_[i]), i);
  }
}

std::uint64_t CylinderIndex::code(std::span<const int> w) const {
  std::uint64_t c = 0;
  for (int k = 0; k < depth_; ++k) c = c * static_cast<std::uint64_t>(shift_.alphabet_size()) + static_cast<std::uint64_t>(w[k]);
  return c;
}

std::optional<std::size_t> CylinderIndex::find(std::span<const int> w) const {
  if (static_cast<int>(w.size()) < depth_) return std::nullopt;
  for (int k = 0; k < depth_; ++k)
    if (w[k] < 0 || w[k] >= shift_.alphabet_size()) return std::nullopt;
  const std::uint64_t c = code(w);
  if (!dense_.empty()) {
    const std::int32_t i = dense_[c];
    if (i < 0) return std::nullopt;
    return static_cast<std::size_t>(i);
  }
  auto it = sparse_.find(c);
  if (it == sparse_.end()) return std::nullopt;
  return it->second;
}

std::size_t CylinderIndex::index_of(std::span<const int> w) const {
  if (static_cast<int>(w.size()) < depth_)
    throw InputError(fmt::format("word of length {} is shorter than cylinder depth {}", w.size(), depth_));
  auto i = find(w);
  if (!i) throw InputError(fmt::format("word {} is not admissible", format_word(Word(w.begin(), w.begin() + depth_), shift_.alphabet_size())));
  return *i;
}

// ---------------------------------------------------------------------------

CylinderGraph::CylinderGraph(const Subshift& shift, int m) : nodes(shift, m) {
  out_edges.resize(nodes.size());
  for (std::size_t u = 0; u < nodes.size(); ++u) {
    const Word& w = nodes.word(u);
    for (int b = 0; b < shift.alphabet_size(); ++b) {
      if (!shift.allowed(w.back(), b)) continue;
      Word label = w;
      label.push_back(b);
      const std::size_t v = nodes.index_of(std::span<const int>(label).subspan(1));
      out_edges[u].push_back(static_cast<int>(edges.size()));
      edges.push_back({static_cast<int>(u), static_cast<int>(v), std::move(label)});
    }
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int edge_between(const CylinderGraph& g, int u, int v) {
  for (int e : g.out_edges[u])
    if (g.edges[e].to == v) return e;
  return -1;
}

double mean_of(const CylinderGraph& g, const std::vector<int>& cycle, std::span<const double> w) {
  return cycle_weight(g, cycle, w) / static_cast<double>(cycle.size());
}

// Cycle in the subgraph of edges that are tight for the potential dist.
std::vector<int> tight_cycle(const CylinderGraph& g, std::span<const double> w, double lambda,
                             const std::vector<double>& dist, double eps) {
  const std::size_t n = g.node_count();
  std::vector<int> color(n, 0), parent(n, -1);
  std::vector<int> found;
  auto tight = [&](const CylinderGraph::Edge& e, double we) {
    return std::abs(dist[e.from] + we - lambda - dist[e.to]) <= eps;
  };
  for (std::size_t s = 0; s < n && found.empty(); ++s) {
    if (color[s]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{static_cast<int>(s), 0}};
    color[s] = 1;
    while (!stack.empty() && found.empty()) {
      auto& [u, pos] = stack.back();
      if (pos < g.out_edges[u].size()) {
        const int eid = g.out_edges[u][pos++];
        const auto& e = g.edges[eid];
        if (!tight(e, w[eid])) continue;
        if (color[e.to] == 0) {
          color[e.to] = 1;
          parent[e.to] = u;
          stack.push_back({e.to, 0});
        } else if (color[e.to] == 1) {
          std::vector<int> cyc;
          for (int x = u; x != e.to; x = parent[x]) cyc.push_back(x);
          cyc.push_back(e.to);
          std::reverse(cyc.begin(), cyc.end());
          found = cyc;
        }
      } else {
        color[u] = 2;
        stack.pop_back();
      }
    }
  }
  return found;
}

}  // namespace

MeanCycle min_mean_cycle(const CylinderGraph& graph, std::span<const double> edge_weights) {
  if (edge_weights.size() != graph.edges.size())
    throw InputError(fmt::format("expected {} edge weights, got {}", graph.edges.size(), edge_weights.size()));
  const std::size_t n = graph.node_count();
  if (graph.edges.empty()) throw StructuralError("graph has no cycle");

  // best[k][v]: minimum weight of a walk with exactly k edges ending at v.
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(n, kInf));
  std::vector<std::vector<int>> via(n + 1, std::vector<int>(n, -1));
  std::fill(best[0].begin(), best[0].end(), 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t eid = 0; eid < graph.edges.size(); ++eid) {
      const auto& e = graph.edges[eid];
      if (best[k - 1][e.from] == kInf) continue;
      const double cand = best[k - 1][e.from] + edge_weights[eid];
      if (cand < best[k][e.to]) {
        best[k][e.to] = cand;
        via[k][e.to] = static_cast<int>(eid);
      }
    }
  }

  double lambda = kInf;
  int argmin = -1;
  for (std::size_t v = 0; v < n; ++v) {
    if (best[n][v] == kInf) continue;
    double worst = -kInf;
    for (std::size_t k = 0; k < n; ++k) {
      if (best[k][v] == kInf) continue;
      worst = std::max(worst, (best[n][v] - best[k][v]) / static_cast<double>(n - k));
    }
    if (worst < lambda) {
      lambda = worst;
      argmin = static_cast<int>(v);
    }
  }
  if (argmin < 0) throw StructuralError("graph has no cycle");

  // Walk of n edges into argmin contains a cycle; decompose and keep the best.
  std::vector<int> walk(n + 1);
  walk[n] = argmin;
  for (std::size_t k = n; k >= 1; --k) walk[k - 1] = graph.edges[via[k][walk[k]]].from;

  MeanCycle result{lambda, {}};
  double best_mean = kInf;
  std::vector<int> stack;
  std::vector<int> pos(n, -1);
  for (int v : walk) {
    if (pos[v] >= 0) {
      const auto start = static_cast<std::size_t>(pos[v]);
      std::vector<int> cyc(stack.begin() + static_cast<std::ptrdiff_t>(start), stack.end());
      const double m = mean_of(graph, cyc, edge_weights);
      if (m < best_mean) {
        best_mean = m;
        result.cycle = cyc;
      }
      for (std::size_t i = start; i < stack.size(); ++i) pos[stack[i]] = -1;
      stack.resize(start);
    }
    pos[v] = static_cast<int>(stack.size());
    stack.push_back(v);
  }

  double scale = 1.0;
  for (double w : edge_weights) scale = std::max(scale, std::abs(w));
  const double eps = 1e-10 * scale;
  if (result.cycle.empty() || std::abs(best_mean - lambda) > eps) {
    const auto dist = walk_potential(graph, edge_weights, lambda);
    result.cycle = tight_cycle(graph, edge_weights, lambda, dist, eps);
    if (result.cycle.empty()) throw NumericalError("minimum mean cycle: could not recover an optimal cycle");
  }
  result.value = mean_of(graph, result.cycle, edge_weights);
  // The recovered cycle attains the Karp value up to rounding; report the cycle's own mean.
  return result;
}

std::vector<double> walk_potential(const CylinderGraph& graph, std::span<const double> edge_weights, double shift) {
  const std::size_t n = graph.node_count();
  std::vector<double> dist(n, 0.0);
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (std::size_t eid = 0; eid < graph.edges.size(); ++eid) {
      const auto& e = graph.edges[eid];
      const double cand = dist[e.from] + edge_weights[eid] - shift;
      if (cand < dist[e.to]) {
        dist[e.to] = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

std::vector<std::vector<int>> enumerate_cycles(const CylinderGraph& graph, int max_len, std::size_t max_count) {
  if (max_len < 1) throw InputError(fmt::format("max cycle length must be positive, got {}", max_len));
  const int n = static_cast<int>(graph.node_count());
  std::vector<std::vector<int>> cycles;
  std::vector<int> path;
  std::vector<char> on_path(n, 0);

  // Depth-first search from each start s through nodes > s.
  auto dfs = [&](auto&& self, int start, int u) -> void {
    for (int eid : graph.out_edges[u]) {
      const int v = graph.edges[eid].to;
      if (v == start) {
        cycles.push_back(path);
        if (cycles.size() > max_count)
          throw UnsupportedInput(fmt::format("more than {} simple cycles; lower the maximum cycle length", max_count));
      } else if (v > start && !on_path[v] && static_cast<int>(path.size()) < max_len) {
        on_path[v] = 1;
        path.push_back(v);
        self(self, start, v);
        path.pop_back();
        on_path[v] = 0;
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    path = {s};
    on_path[s] = 1;
    dfs(dfs, s, s);
    on_path[s] = 0;
  }
  std::sort(cycles.begin(), cycles.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return cycles;
}

std::vector<std::vector<int>> enumerate_cycles(const Subshift& shift, int depth, int max_len) {
  return enumerate_cycles(CylinderGraph(shift, depth), max_len);
}

Word cycle_word(const CylinderGraph& graph, const std::vector<int>& cycle) {
  Word w;
  w.reserve(cycle.size());
  for (int v : cycle) w.push_back(graph.nodes.word(v).front());
  return w;
}

double cycle_weight(const CylinderGraph& graph, const std::vector<int>& cycle, std::span<const double> edge_weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const int e = edge_between(graph, cycle[i], cycle[(i + 1) % cycle.size()]);
    if (e < 0) throw InputError("cycle uses a missing edge");
    s += edge_weights[e];
  }
  return s;
}

std::string format_word(const Word& w, int alphabet_size) {
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (alphabet_size > 9 && k > 0) s += '.';
    s += std::to_string(w[k] + 1);
  }
  return s;
}

Word parse_word(std::string_view text, int alphabet_size) {
  Word w;
  auto push = [&](long v) {
    if (v < 1 || v > alphabet_size)
      throw InputError(fmt::format("letter {} in word '{}' is outside 1..{}", v, text, alphabet_size));
    w.push_back(static_cast<int>(v - 1));
  };
  if (text.empty()) throw InputError("empty word");
  if (text.find('.') != std::string_view::npos || alphabet_size > 9) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t end = std::min(text.find('.', start), text.size());
      const std::string part(text.substr(start, end - start));
      if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
        throw InputError(fmt::format("malformed word '{}'", text));
      push(std::stol(part));
      start = end + 1;
    }
  } else {
    for (char c : text) {
      if (c < '0' || c > '9') throw InputError(fmt::format("malformed word '{}'", text));
      push(c - '0');
    }
  }
  return w;
}

}  // namespace rpf
