#include <doctest.h>

#include <algorithm>
#include <random>

#include "rpf/errors.hpp"
#include "rpf/symbolic.hpp"

using namespace rpf;

namespace {

using Mat = std::vector<std::vector<long long>>;

Mat mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c(n, std::vector<long long>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Mat to_mat(const IncidenceMatrix& a) {
  Mat m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i].assign(a[i].begin(), a[i].end());
  return m;
}

// Smallest n <= (M-1)^2+1 with A^n > 0, by repeated multiplication.
std::optional<int> brute_primitive(const IncidenceMatrix& a) {
  const int m = static_cast<int>(a.size());
  Mat p = to_mat(a);
  for (int n = 1; n <= (m - 1) * (m - 1) + 1; ++n) {
    bool pos = true;
    for (auto& row : p)
      for (auto v : row) pos = pos && v > 0;
    if (pos) return n;
    p = mul(p, to_mat(a));
    for (auto& row : p)
      for (auto& v : row) v = v > 0 ? 1 : 0;
  }
  return std::nullopt;
}

long long matrix_power_sum(const IncidenceMatrix& a, int e) {
  const std::size_t n = a.size();
  Mat p(n, std::vector<long long>(n, 0));
  for (std::size_t i = 0; i < n; ++i) p[i][i] = 1;
  for (int k = 0; k < e; ++k) p = mul(p, to_mat(a));
  long long s = 0;
  for (auto& row : p)
    for (auto v : row) s += v;
  return s;
}

// Every word over M letters of length n filtered by admissibility.
std::vector<Word> brute_words(const Subshift& s, int n) {
  std::vector<Word> out;
  const int m = s.alphabet_size();
  Word w(n, 0);
  while (true) {
    if (s.admissible(w)) out.push_back(w);
    int k = n - 1;
    while (k >= 0 && ++w[k] == m) w[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

const IncidenceMatrix kGolden{{1, 1}, {1, 0}};

}  // namespace

TEST_SUITE("symbolic") {
  TEST_CASE("is_primitive examples") {
    auto full = is_primitive({{1, 1}, {1, 1}});
    CHECK(full.primitive);
    CHECK(full.witness_power == 1);
    auto flip = is_primitive({{0, 1}, {1, 0}});
    CHECK_FALSE(flip.primitive);
    CHECK_FALSE(flip.witness_power.has_value());
    auto golden = is_primitive(kGolden);
    CHECK(golden.primitive);
    CHECK(golden.witness_power == brute_primitive(kGolden));
    CHECK(golden.witness_power == 2);
  }

  TEST_CASE("is_primitive rejects malformed matrices") {
    CHECK_THROWS_AS(is_primitive({{1, 1}, {1}}), InputError);
    CHECK_THROWS_AS(is_primitive({{1, 2}, {1, 1}}), InputError);
  }

  TEST_CASE("is_primitive matches brute force on every 0/1 matrix up to M = 3, sampled at M = 4") {
    for (int m = 2; m <= 3; ++m) {
      const int bits = m * m;
      for (int code = 0; code < (1 << bits); ++code) {
        IncidenceMatrix a(m, std::vector<int>(m));
        for (int k = 0; k < bits; ++k) a[k / m][k % m] = (code >> k) & 1;
        const auto r = is_primitive(a);
        CHECK(r.witness_power == brute_primitive(a));
        CHECK(r.primitive == brute_primitive(a).has_value());
      }
    }
    std::mt19937 gen(7);
    for (int trial = 0; trial < 3000; ++trial) {
      IncidenceMatrix a(4, std::vector<int>(4));
      for (auto& row : a)
        for (auto& v : row) v = static_cast<int>(gen() % 3 != 0);
      CHECK(is_primitive(a).witness_power == brute_primitive(a));
    }
  }

  TEST_CASE("subshift validation") {
    CHECK_THROWS_AS(Subshift(IncidenceMatrix{{0, 1}, {1, 0}}), InputError);
    CHECK_THROWS_AS(Subshift(IncidenceMatrix{{1}}), InputError);
    CHECK_NOTHROW(Subshift{kGolden});
  }

  TEST_CASE("admissible_words examples") {
    const auto full = Subshift::full(2);
    CHECK(admissible_words(full, 2) == std::vector<Word>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const Subshift g(kGolden);
    CHECK(admissible_words(g, 2) == std::vector<Word>{{0, 0}, {0, 1}, {1, 0}});
    CHECK(admissible_words(g, 2) == brute_words(g, 2));
    CHECK(admissible_words(g, 1) == std::vector<Word>{{0}, {1}});
    CHECK_THROWS_AS(admissible_words(g, 0), InputError);
  }

  TEST_CASE("word count equals the entry sum of A^(n-1) on random primitive matrices") {
    std::mt19937 gen(11);
    int tested = 0;
    while (tested < 12) {
      const int m = 2 + static_cast<int>(gen() % 4);
      IncidenceMatrix a(m, std::vector<int>(m));
      for (auto& row : a)
        for (auto& v : row) v = static_cast<int>(gen() % 2);
      if (!is_primitive(a).primitive) continue;
      ++tested;
      const Subshift s(a);
      for (int n = 1; n <= 12; ++n) {
        if (std::pow(m, n) > 3e5) break;
        CHECK(static_cast<long long>(admissible_words(s, n).size()) == matrix_power_sum(a, n - 1));
      }
      CHECK(admissible_words(s, 4) == brute_words(s, 4));
    }
  }

  TEST_CASE("preimage_prefixes examples and recursion") {
    const auto full = Subshift::full(2);
    CHECK(preimage_prefixes(full, {0, 1}, 2).size() == 4);
    const Subshift g(kGolden);
    CHECK(preimage_prefixes(g, {1, 0}, 1) == std::vector<Word>{{0}});
    CHECK(preimage_prefixes(g, {1}, 0) == std::vector<Word>{Word{}});

    const Word x{0, 1, 0};
    for (int n = 0; n < 7; ++n) {
      std::vector<Word> built;
      for (const Word& u : preimage_prefixes(g, x, n))
        for (int j = 0; j < 2; ++j) {
          const int first = u.empty() ? x[0] : u[0];
          if (!g.allowed(j, first)) continue;
          Word ju{j};
          ju.insert(ju.end(), u.begin(), u.end());
          built.push_back(ju);
        }
      std::sort(built.begin(), built.end());
      CHECK(preimage_prefixes(g, x, n + 1) == built);
    }
  }

  TEST_CASE("min_mean_cycle examples") {
    const CylinderGraph full(Subshift::full(2), 1);
    std::vector<double> w(full.edges.size(), 2.5);
    auto r = min_mean_cycle(full, w);
    CHECK(r.value == doctest::Approx(2.5));

    // Self-loop weights 1 at letter 1 and -1 at letter 2, large elsewhere.
    for (std::size_t e = 0; e < full.edges.size(); ++e) {
      const auto& edge = full.edges[e];
      w[e] = edge.from == edge.to ? (edge.from == 0 ? 1.0 : -1.0) : 10.0;
    }
    r = min_mean_cycle(full, w);
    CHECK(r.value == doctest::Approx(-1.0));
    CHECK(r.cycle == std::vector<int>{1});

    const CylinderGraph g(Subshift(kGolden), 1);
    std::vector<double> gw(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto& edge = g.edges[e];
      gw[e] = (edge.from == 0 && edge.to == 0) ? 3.0 : 1.0;
    }
    // Oracle: minimum over all simple cycles.
    double best = 1e300;
    for (const auto& c : enumerate_cycles(g, 2)) best = std::min(best, cycle_weight(g, c, gw) / c.size());
    CHECK(min_mean_cycle(g, gw).value == doctest::Approx(best));
    CHECK(best == doctest::Approx(1.0));
  }

  TEST_CASE("enumerate_cycles examples") {
    auto sorted = [](std::vector<std::vector<int>> cs) {
      for (auto& c : cs) std::rotate(c.begin(), std::min_element(c.begin(), c.end()), c.end());
      std::sort(cs.begin(), cs.end());
      return cs;
    };
    CHECK(sorted(enumerate_cycles(Subshift::full(2), 1, 2)) == std::vector<std::vector<int>>{{0}, {0, 1}, {1}});
    CHECK(sorted(enumerate_cycles(Subshift(kGolden), 1, 2)) == std::vector<std::vector<int>>{{0}, {0, 1}});
    const auto loops = enumerate_cycles(Subshift::full(3), 1, 1);
    CHECK(loops.size() == 3);
    for (const auto& c : loops) CHECK(c.size() == 1);
  }

  TEST_CASE("word text form") {
    CHECK(format_word({0, 1, 0}, 2) == "121");
    CHECK(parse_word("121", 2) == Word{0, 1, 0});
    CHECK(format_word({9, 0}, 12) == "10.1");
    CHECK(parse_word("10.1", 12) == Word{9, 0});
    CHECK_THROWS_AS(parse_word("3", 2), InputError);
  }
}
