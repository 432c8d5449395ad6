#pragma once

// Subshifts of finite type: admissible words, cylinder indexing, the
// cylinder transition graph and cycle analysis on it.
//
// Letters are stored 0-based (0..M-1). Text forms (JSON keys, CLI output)
// are 1-based: "12" is the word (0,1). Alphabets with M > 9 use a
// dot-separated text form ("1.10.3").

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rpf {

using Word = std::vector<int>;
using IncidenceMatrix = std::vector<std::vector<int>>;

struct PrimitivityResult {
  bool primitive = false;
  /// Smallest n with A^n entrywise positive.
  std::optional<int> witness_power;
};

/// Checks primitivity by powering the 0/1 pattern up to the Wielandt bound
/// (M-1)^2 + 1. Throws InputError for non-square or non-binary input.
PrimitivityResult is_primitive(const IncidenceMatrix& a);

/// One-sided subshift of finite type over {0..M-1} with a primitive
/// incidence matrix. Immutable after construction.
class Subshift {
 public:
  /// Throws InputError unless A is square, binary, M >= 2 and primitive.
  explicit Subshift(IncidenceMatrix a);

  static Subshift full(int alphabet_size);

  int alphabet_size() const { return m_; }
  const IncidenceMatrix& matrix() const { return a_; }
  bool allowed(int from, int to) const { return a_[from][to] != 0; }
  bool is_full() const;

  /// True if every letter is in range and every consecutive pair is allowed.
  bool admissible(std::span<const int> w) const;

  bool operator==(const Subshift& other) const { return a_ == other.a_; }

 private:
  int m_;
  IncidenceMatrix a_;
};

/// Admissible words of length n in lexicographic order. n >= 1.
std::vector<Word> admissible_words(const Subshift& shift, int n);

/// All admissible u of length n with u·x_head admissible, lexicographic.
/// n = 0 yields the single empty prefix.
std::vector<Word> preimage_prefixes(const Subshift& shift, const Word& x_head, int n);

/// Bijection between admissible words of length `depth` and 0..size()-1,
/// following lexicographic order.
class CylinderIndex {
 public:
  CylinderIndex(Subshift shift, int depth);

  const Subshift& shift() const { return shift_; }
  int depth() const { return depth_; }
  std::size_t size() const { return words_.size(); }
  const Word& word(std::size_t i) const { return words_[i]; }
  const std::vector<Word>& words() const { return words_; }

  /// Index of the depth-letter prefix of w, or nullopt if that prefix is
  /// not admissible. Requires w.size() >= depth().
  std::optional<std::size_t> find(std::span<const int> w) const;

  /// As find(), throwing InputError when absent or too short.
  std::size_t index_of(std::span<const int> w) const;

 private:
  std::uint64_t code(std::span<const int> w) const;

  Subshift shift_;
  int depth_;
  std::vector<Word> words_;
  std::vector<std::int32_t> dense_;  // used when M^depth is small
  std::unordered_map<std::uint64_t, std::size_t> sparse_;
};

/// Transition graph on depth-m cylinders. An edge runs from the node of y
/// (y_1..y_m) to the node of sigma(y) (y_2..y_{m+1}) and carries the
/// (m+1)-letter word y_1..y_{m+1}. Walks along edges are exactly the
/// admissible words, so cycles are periodic orbits.
struct CylinderGraph {
  struct Edge {
    int from = 0;
    int to = 0;
    Word word;
  };

  explicit CylinderGraph(const Subshift& shift, int m);

  std::size_t node_count() const { return nodes.size(); }

  CylinderIndex nodes;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out_edges;
};

struct MeanCycle {
  double value = 0.0;
  /// Node indices in walk order; the closing edge returns to cycle.front().
  std::vector<int> cycle;
};

/// Karp's minimum mean cycle over the graph with one weight per edge
/// (indexed like graph.edges). Throws StructuralError if acyclic.
MeanCycle min_mean_cycle(const CylinderGraph& graph, std::span<const double> edge_weights);

/// Simple directed cycles of length <= max_len, each rotated to start at its
/// smallest node, sorted by (length, nodes). Throws UnsupportedInput if more
/// than max_count cycles exist.
std::vector<std::vector<int>> enumerate_cycles(const CylinderGraph& graph, int max_len,
                                               std::size_t max_count = 2'000'000);

std::vector<std::vector<int>> enumerate_cycles(const Subshift& shift, int depth, int max_len);

/// The periodic block of a cycle: first letters of its nodes in order.
Word cycle_word(const CylinderGraph& graph, const std::vector<int>& cycle);

/// Sum of edge weights along a cycle given as node sequence.
double cycle_weight(const CylinderGraph& graph, const std::vector<int>& cycle,
                    std::span<const double> edge_weights);

/// Shortest-walk potential for weights shifted by -shift: phi(v) is the
/// minimum over walks ending at v (of any length, including the empty walk)
/// of sum(w - shift). Requires no negative cycle of the shifted weights.
std::vector<double> walk_potential(const CylinderGraph& graph, std::span<const double> edge_weights,
                                   double shift);

std::string format_word(const Word& w, int alphabet_size);
Word parse_word(std::string_view text, int alphabet_size);

}  // namespace rpf
