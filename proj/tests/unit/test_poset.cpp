#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "tfp/poset.hpp"

using namespace tfp;

namespace {

CombMap cycle4() { return build_map({{1, 2}, {3, 4}, {5, 6}, {7, 8}}, {{2, 3}, {4, 5}, {6, 7}, {8, 1}}); }

CombMap random_closed(std::mt19937_64& rng, const std::vector<int>& degrees) {
  int m = std::accumulate(degrees.begin(), degrees.end(), 0);
  std::vector<int> pi, order(m), alpha(m);
  int off = 0;
  for (int d : degrees) {
    for (int i = 0; i < d; ++i) pi.push_back(off + (i + 1) % d);
    off += d;
  }
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i + 1 < m; i += 2) {
    alpha[order[i]] = order[i + 1];
    alpha[order[i + 1]] = order[i];
  }
  return CombMap(pi, alpha);
}

// all maps reachable downward by disconnecting switches (including m)
std::vector<CombMap> down_set(const CombMap& m) {
  std::set<std::vector<int>> seen{m.alpha()};
  std::vector<CombMap> out{m};
  for (std::size_t h = 0; h < out.size(); ++h)
    for (const auto& s : covering_switches(out[h]))
      if (s.delta_gamma == 1 && seen.insert(s.map.alpha()).second) out.push_back(s.map);
  return out;
}

}  // namespace

TEST_CASE("covering switches") {
  auto sw = covering_switches(melon(2));
  REQUIRE(sw.size() == 2);
  std::set<std::vector<int>> got;
  for (const auto& s : sw) {
    if (s.delta_gamma == 1) CHECK(s.map.alpha() == disjoint_union(bouquet(2), bouquet(2)).alpha());
    if (s.delta_gamma == 0) CHECK(s.map == melon(2, {1, 0}));
    got.insert(s.map.alpha());
  }
  CHECK(got.size() == 2);
  CHECK(covering_switches(bouquet(2)).empty());

  auto c4 = cycle4();
  auto opposite = build_map({{1, 2}, {3, 4}, {5, 6}, {7, 8}}, {{2, 7}, {4, 5}, {3, 6}, {8, 1}});
  bool found = false;
  for (const auto& s : covering_switches(c4))
    if (s.map == opposite) {
      found = true;
      CHECK(s.delta_gamma == 1);
    }
  CHECK(found);
  auto parts = split_components(ColoredMap(opposite));
  REQUIRE(parts.size() == 2);
  for (const auto& p : parts) CHECK(p.map.num_vertices() == 2);
}

TEST_CASE("switch relation is symmetric and changes gamma by at most one") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    auto m = random_closed(rng, {2, 4, 2, 3, 3});
    for (const auto& s : covering_switches(m)) {
      CHECK(std::abs(s.delta_gamma) <= 1);
      bool back = false;
      for (const auto& r : covering_switches(s.map)) back |= r.map == m && r.delta_gamma == -s.delta_gamma;
      CHECK(back);
    }
  }
}

TEST_CASE("leq") {
  auto f2 = melon(2);
  auto bb = disjoint_union(bouquet(2), bouquet(2));
  CHECK(leq(bb, f2));
  CHECK_FALSE(leq(f2, bb));
  CHECK_FALSE(leq(f2, melon(2, {1, 0})));
  CHECK_FALSE(leq(melon(2, {1, 0}), f2));
  CHECK(leq(f2, f2));
  CHECK_THROWS_AS(leq(melon(2), melon(3)), MapError);

  // agrees with the explicit down set
  std::mt19937_64 rng(2);
  for (int t = 0; t < 6; ++t) {
    auto m = random_closed(rng, {2, 2, 4, 2});
    auto ds = down_set(m);
    std::set<std::vector<int>> below;
    for (const auto& d : ds) below.insert(d.alpha());
    auto other = random_closed(rng, {2, 2, 4, 2});
    CHECK(leq(other, m) == (below.count(other.alpha()) > 0));
    for (const auto& d : ds) CHECK(leq(d, m));
  }
}

TEST_CASE("minimal map") {
  CHECK(minimal_map(melon(2)).alpha() == disjoint_union(bouquet(2), bouquet(2)).alpha());
  auto m4 = minimal_map(cycle4());
  CHECK(components(m4).gamma == 4);
  CHECK(minimal_map(bouquet(2)) == bouquet(2));
  CHECK(minimal_map(bouquet(4, {1, 0})) == bouquet(4, {1, 0}));
  CHECK_THROWS_AS(minimal_map(melon(3)), MapError);

  // exhaustive over every even-degree map with at most 8 directed edges
  std::vector<std::vector<int>> degree_sets = {{2}, {4}, {2, 2}, {2, 4}, {4, 4}, {2, 2, 2}, {6}, {2, 2, 4}, {2, 2, 2, 2}, {8}, {6, 2}};
  for (const auto& ds : degree_sets) {
    int m = std::accumulate(ds.begin(), ds.end(), 0);
    std::vector<int> pi;
    int off = 0;
    for (int d : ds) {
      for (int i = 0; i < d; ++i) pi.push_back(off + (i + 1) % d);
      off += d;
    }
    std::vector<int> alpha(m, -1);
    std::function<void()> rec = [&]() {
      int a = std::find(alpha.begin(), alpha.end(), -1) - alpha.begin();
      if (a == m) {
        CombMap cm(pi, alpha);
        std::vector<std::vector<int>> minimal;
        for (const auto& d : down_set(cm)) {
          bool has_lower = false;
          for (const auto& s : covering_switches(d)) has_lower |= s.delta_gamma == 1;
          if (!has_lower) minimal.push_back(d.alpha());
        }
        REQUIRE(minimal.size() == 1);
        CHECK(minimal_map(cm).alpha() == minimal[0]);
        return;
      }
      for (int b = a + 1; b < m; ++b)
        if (alpha[b] < 0) {
          alpha[a] = b;
          alpha[b] = a;
          rec();
          alpha[a] = alpha[b] = -1;
        }
    };
    rec();
  }
}

TEST_CASE("moebius") {
  auto f2 = melon(2);
  auto bb = disjoint_union(bouquet(2), bouquet(2));
  CHECK(moebius(f2, f2) == 1);
  CHECK(moebius(bb, f2) == -1);
  CHECK(interval(bb, f2).size() == 2);
  CHECK_THROWS_AS(moebius(melon(2, {1, 0}), f2), MapError);

  std::mt19937_64 rng(4);
  int checked = 0;
  while (checked < 20) {
    auto m = random_closed(rng, {2, 2, 2, 2, 4});
    auto m0 = minimal_map(m);
    auto iv = interval(m0, m);
    long long s = 0;
    for (const auto& n : iv) s += moebius(n, m);
    CHECK(s == (m == m0 ? 1 : 0));
    // the dual recursion mu(m0, m) = -sum_{m0 <= n < m} mu(m0, n)
    if (!(m == m0)) {
      long long d = 0;
      for (const auto& n : iv)
        if (!(n == m)) d += moebius(m0, n);
      CHECK(moebius(m0, m) == -d);
    }
    ++checked;
  }
}

TEST_CASE("meet and join") {
  auto c4 = cycle4();
  auto m1 = build_map({{1, 2}, {3, 4}, {5, 6}, {7, 8}}, {{2, 7}, {4, 5}, {3, 6}, {8, 1}});
  auto m2 = build_map({{1, 2}, {3, 4}, {5, 6}, {7, 8}}, {{2, 3}, {4, 1}, {6, 7}, {8, 5}});
  REQUIRE(leq(m1, c4));
  REQUIRE(leq(m2, c4));
  auto mj = lattice_meet_join(m1, m2, c4);
  CHECK(mj.meet == minimal_map(c4));
  CHECK(components(mj.meet).gamma == 4);
  CHECK(mj.join == c4);
  auto self = lattice_meet_join(m1, m1, c4);
  CHECK(self.meet == m1);
  CHECK(self.join == m1);

  // universal property by brute force on random intervals
  std::mt19937_64 rng(9);
  for (int t = 0; t < 8; ++t) {
    auto m = random_closed(rng, {2, 2, 2, 2, 2});
    auto iv = interval(minimal_map(m), m);
    if (iv.size() > 40) continue;
    std::uniform_int_distribution<std::size_t> pick(0, iv.size() - 1);
    auto a = iv[pick(rng)], b = iv[pick(rng)];
    auto r = lattice_meet_join(a, b, m);
    for (const auto& n : iv) {
      if (leq(n, a) && leq(n, b)) CHECK(leq(n, r.meet));
      if (leq(a, n) && leq(b, n)) CHECK(leq(r.join, n));
    }
    CHECK(leq(r.meet, a));
    CHECK(leq(r.meet, b));
    CHECK(leq(a, r.join));
    CHECK(leq(b, r.join));
  }
}

TEST_CASE("melonic maps") {
  std::mt19937_64 rng(21);
  for (int p = 2; p <= 4; ++p)
    for (int t = 0; t < 3; ++t) {
      std::vector<int> s(p);
      std::iota(s.begin(), s.end(), 0);
      std::shuffle(s.begin(), s.end(), rng);
      auto f = melon(p, s);
      CHECK(is_melonic(f));
    }
  // every single switch of f_4 keeps two parallel edges, so f_4 is already minimal
  CHECK(minimal_map(melon(4)) == melon(4));
  CHECK(is_melonic(cycle4()));
  CHECK_FALSE(is_melonic(bouquet(2)));
  // K4 with one edge per vertex pair
  auto k4 = build_map({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}}, {{1, 4}, {2, 7}, {3, 10}, {5, 8}, {6, 11}, {9, 12}});
  CHECK(is_connected(k4));
  CHECK_FALSE(is_melonic(k4));
  // for degree 2 the minimal map of a melonic map is a union of bouquets
  std::mt19937_64 rng2(5);
  int seen = 0;
  for (int t = 0; t < 200 && seen < 15; ++t) {
    auto m = random_closed(rng2, {2, 2, 2, 2, 2, 2});
    if (!is_connected(m) || !is_melonic(m)) continue;
    ++seen;
    for (const auto& c : split_components(ColoredMap(minimal_map(m)))) CHECK(c.map.num_vertices() == 1);
  }
  CHECK(seen > 0);
}

TEST_CASE("melonic census") {
  CHECK(fuss_catalan(2, 1) == 1);
  CHECK(fuss_catalan(2, 2) == 2);
  CHECK(fuss_catalan(2, 3) == 5);
  CHECK(fuss_catalan(3, 2) == 3);
  CHECK(fuss_catalan(3, 3) == 12);
  for (int k = 1; k <= 3; ++k) {
    auto r = melonic_census(2, k);
    CHECK(r.enumerated == r.fuss_catalan);
  }
  auto r32 = melonic_census(3, 2);
  CHECK(r32.enumerated == 3);
  CHECK(r32.fuss_catalan == 3);
  auto r42 = melonic_census(4, 2);
  CHECK(r42.enumerated == 4);
  CHECK_THROWS_AS(melonic_census(4, 3), MapError);
}

TEST_CASE("hat maps") {
  HatConfig cfg;
  cfg.family_of = {{"A", "a"}, {"B", "b"}};
  ColoredMap mono(cycle4(), {"A", "A", "A", "A"});
  auto h = hat_maps(mono, cfg);
  REQUIRE(h.size() == 1);
  CHECK(h[0] == mono.map);

  ColoredMap mixed(melon(2), {"A", "B"});
  h = hat_maps(mixed, cfg);
  REQUIRE(h.size() == 1);
  CHECK(h[0].alpha() == disjoint_union(bouquet(2), bouquet(2)).alpha());

  ColoredMap c(cycle4(), {"A", "A", "B", "B"});
  h = hat_maps(c, cfg);
  REQUIRE(h.size() == 1);
  auto comps = components(h[0]);
  CHECK(comps.gamma == 2);
  CHECK(comps.of_vertex[0] == comps.of_vertex[1]);
  CHECK(comps.of_vertex[2] == comps.of_vertex[3]);

  // identity vertices never make an edge mixed
  ColoredMap withid(melon(2), {"A", "1"});
  h = hat_maps(withid, cfg);
  REQUIRE(h.size() == 1);
  CHECK(h[0] == melon(2));
}

TEST_CASE("hat maps are closed under meet") {
  HatConfig cfg;
  cfg.family_of = {{"A", "a"}, {"C", "a"}, {"B", "b"}, {"D", "b"}};
  std::mt19937_64 rng(33);
  int nontrivial = 0;
  for (int t = 0; t < 40; ++t) {
    std::vector<int> deg(6, 2);
    if (t % 2) deg = {2, 2, 4, 2, 2};
    auto m = random_closed(rng, deg);
    if (!is_connected(m)) continue;
    std::vector<std::string> colors;
    for (int v = 0; v < m.num_vertices(); ++v) colors.push_back(m.degree(v) == 2 ? (rng() % 2 ? "A" : "B") : (rng() % 2 ? "C" : "D"));
    ColoredMap cm(m, colors);
    auto hats = hat_maps(cm, cfg);
    std::set<std::vector<int>> hs;
    for (const auto& x : hats) {
      hs.insert(x.alpha());
      CHECK(leq(x, m));
      CHECK(satisfies_p1(ColoredMap(x, colors), cfg));
    }
    if (hats.size() > 1) ++nontrivial;
    for (const auto& a : hats)
      for (const auto& b : hats) CHECK(hs.count(lattice_meet_join(a, b, m).meet.alpha()) == 1);
  }
  CHECK(nontrivial > 0);
}
