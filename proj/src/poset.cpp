#include "tfp/poset.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <set>

#include "tfp/wiring.hpp"

namespace tfp {

namespace {

struct Geometry {
  std::vector<int> vertex_of;
  int n = 0;
  explicit Geometry(const std::vector<int>& pi) : vertex_of(pi.size(), -1) {
    for (std::size_t s = 0; s < pi.size(); ++s) {
      if (vertex_of[s] >= 0) continue;
      for (int e = static_cast<int>(s); vertex_of[e] < 0; e = pi[e]) vertex_of[e] = n;
      ++n;
    }
  }
  // component id per vertex, numbered by least vertex
  std::vector<int> comps(const std::vector<int>& alpha, int* gamma) const {
    detail::DisjointSets ds(n);
    for (std::size_t e = 0; e < alpha.size(); ++e) ds.unite(vertex_of[e], vertex_of[alpha[e]]);
    std::vector<int> id(n, -1), out(n);
    int g = 0;
    for (int v = 0; v < n; ++v) {
      int r = ds.find(v);
      if (id[r] < 0) id[r] = g++;
      out[v] = id[r];
    }
    if (gamma) *gamma = g;
    return out;
  }
};

// the two alternative pairings of the four endpoints of edges {a, alpha a} and {b, alpha b}
void for_each_switch(const std::vector<int>& alpha, const std::function<void(std::vector<int>&, int, int)>& f) {
  const int m = static_cast<int>(alpha.size());
  for (int a = 0; a < m; ++a) {
    int a2 = alpha[a];
    if (a2 < a || a2 == a) continue;
    for (int b = a + 1; b < m; ++b) {
      int b2 = alpha[b];
      if (b2 < b || b2 == b || b == a2) continue;
      std::vector<int> x(alpha);
      x[a] = b;
      x[b] = a;
      x[a2] = b2;
      x[b2] = a2;
      f(x, a, b);
      x = alpha;
      x[a] = b2;
      x[b2] = a;
      x[a2] = b;
      x[b] = a2;
      f(x, a, b);
    }
  }
}

void require_closed(const CombMap& m) {
  if (!m.closed()) throw MapError("switch poset requires a closed map");
  if (m.kind() != MapKind::map) throw MapError("switch poset requires a map, not a hypermap");
}

}  // namespace

std::vector<SwitchResult> covering_switches(const CombMap& m) {
  require_closed(m);
  Geometry g(m.pi());
  int g0 = 0;
  g.comps(m.alpha(), &g0);
  std::vector<SwitchResult> out;
  for_each_switch(m.alpha(), [&](std::vector<int>& x, int, int) {
    int g1 = 0;
    g.comps(x, &g1);
    out.push_back({CombMap(m.pi(), x), g1 - g0});
  });
  return out;
}

// ---------------------------------------------------------------- view

SwitchPosetView::SwitchPosetView(std::vector<int> pi) : pi_(std::move(pi)) {}

const std::vector<std::vector<int>>& SwitchPosetView::lower_covers(const std::vector<int>& alpha) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = covers_.find(alpha);
    if (it != covers_.end()) return it->second;
  }
  Geometry g(pi_);
  int g0 = 0;
  g.comps(alpha, &g0);
  std::vector<std::vector<int>> out;
  for_each_switch(alpha, [&](std::vector<int>& x, int, int) {
    int g1 = 0;
    g.comps(x, &g1);
    if (g1 == g0 + 1) out.push_back(x);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::lock_guard<std::mutex> lock(mu_);
  return covers_.emplace(alpha, std::move(out)).first->second;
}

namespace {

// n can only lie above `low` if every component of low sits inside one component of n
bool coarsens(const std::vector<int>& comps_n, const std::vector<int>& comps_low) {
  std::vector<int> rep(comps_low.size(), -1);
  for (std::size_t v = 0; v < comps_low.size(); ++v) {
    int& r = rep[comps_low[v]];
    if (r < 0)
      r = comps_n[v];
    else if (r != comps_n[v])
      return false;
  }
  return true;
}

}  // namespace

bool SwitchPosetView::leq(const std::vector<int>& a, const std::vector<int>& b) {
  if (a == b) return true;
  Geometry g(pi_);
  int ga = 0, gb = 0;
  auto ca = g.comps(a, &ga);
  g.comps(b, &gb);
  if (gb >= ga) return false;
  std::set<std::vector<int>> seen{b};
  std::deque<std::vector<int>> q{b};
  while (!q.empty()) {
    auto cur = std::move(q.front());
    q.pop_front();
    for (const auto& x : lower_covers(cur)) {
      if (x == a) return true;
      if (seen.count(x)) continue;
      int gx = 0;
      auto cx = g.comps(x, &gx);
      if (gx >= ga || !coarsens(cx, ca)) continue;
      seen.insert(x);
      q.push_back(x);
    }
  }
  return false;
}

const SwitchPosetView::Interval& SwitchPosetView::interval(const std::vector<int>& bottom,
                                                           const std::vector<int>& top) {
  auto key = std::make_pair(bottom, top);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = intervals_.find(key);
    if (it != intervals_.end()) return *it->second;
  }
  Geometry g(pi_);
  int gb = 0;
  auto cb = g.comps(bottom, &gb);

  // downward closure of top restricted to maps that may lie above bottom
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> nodes{top};
  index[top] = 0;
  std::vector<std::vector<int>> down(1);
  for (std::size_t h = 0; h < nodes.size(); ++h) {
    auto cur = nodes[h];
    for (const auto& x : lower_covers(cur)) {
      auto it = index.find(x);
      int id;
      if (it == index.end()) {
        int gx = 0;
        auto cx = g.comps(x, &gx);
        if (gx > gb || !coarsens(cx, cb)) continue;
        id = static_cast<int>(nodes.size());
        index[x] = id;
        nodes.push_back(x);
        down.emplace_back();
      } else {
        id = it->second;
      }
      down[h].push_back(id);
    }
  }
  auto bit = index.find(bottom);
  if (bit == index.end()) throw MapError("maps are not comparable in the switch order");
  // upward reachability from bottom
  std::vector<std::vector<int>> up(nodes.size());
  for (std::size_t h = 0; h < nodes.size(); ++h)
    for (int d : down[h]) up[d].push_back(static_cast<int>(h));
  std::vector<char> in(nodes.size(), 0);
  std::vector<int> stack{bit->second};
  in[bit->second] = 1;
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (int y : up[x])
      if (!in[y]) {
        in[y] = 1;
        stack.push_back(y);
      }
  }
  std::vector<int> keep;
  std::vector<int> gam(nodes.size());
  for (std::size_t h = 0; h < nodes.size(); ++h) {
    g.comps(nodes[h], &gam[h]);
    if (in[h]) keep.push_back(static_cast<int>(h));
  }
  std::stable_sort(keep.begin(), keep.end(), [&](int a, int b) { return gam[a] < gam[b]; });
  std::vector<int> pos(nodes.size(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = static_cast<int>(i);

  auto res = std::make_shared<Interval>();
  const int K = static_cast<int>(keep.size());
  res->elements.resize(K);
  res->gamma.resize(K);
  res->above.resize(K);
  res->mu_top.assign(K, 0);
  std::vector<std::vector<char>> above(K, std::vector<char>(K, 0));
  for (int i = 0; i < K; ++i) {
    int h = keep[i];
    res->elements[i] = nodes[h];
    res->gamma[i] = gam[h];
    for (int parent : up[h]) {
      int j = pos[parent];
      if (j < 0) continue;
      above[i][j] = 1;
      for (int t = 0; t < K; ++t)
        if (above[j][t]) above[i][t] = 1;
    }
    for (int t = 0; t < K; ++t)
      if (above[i][t]) res->above[i].push_back(t);
    long long s = 0;
    for (int t : res->above[i]) s += res->mu_top[t];
    res->mu_top[i] = i == 0 ? 1 : -s;
  }
  res->bottom = pos[bit->second];
  std::lock_guard<std::mutex> lock(mu_);
  return *intervals_.emplace(key, res).first->second;
}

// ---------------------------------------------------------------- free functions

namespace {

void require_same_pi(const CombMap& a, const CombMap& b) {
  if (a.pi() != b.pi()) throw MapError("maps do not share pi");
  require_closed(a);
  require_closed(b);
}

}  // namespace

bool leq(const CombMap& m1, const CombMap& m2) {
  require_same_pi(m1, m2);
  SwitchPosetView view(m1.pi());
  return view.leq(m1.alpha(), m2.alpha());
}

CombMap minimal_map(const CombMap& m) {
  require_closed(m);
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.degree(v) % 2)
      throw MapError("minimal_map: vertex " + std::to_string(v + 1) + " has odd degree " +
                     std::to_string(m.degree(v)) + "; the minimal map need not be unique");
  Geometry g(m.pi());
  std::vector<int> alpha = m.alpha();
  int g0 = 0;
  g.comps(alpha, &g0);
  for (bool progress = true; progress;) {
    progress = false;
    std::vector<int> next;
    for_each_switch(alpha, [&](std::vector<int>& x, int, int) {
      if (!next.empty()) return;
      int g1 = 0;
      g.comps(x, &g1);
      if (g1 == g0 + 1) next = x;
    });
    if (!next.empty()) {
      alpha = std::move(next);
      ++g0;
      progress = true;
    }
  }
  return CombMap(m.pi(), alpha);
}

std::vector<CombMap> interval(const CombMap& m0, const CombMap& m) {
  require_same_pi(m0, m);
  SwitchPosetView view(m.pi());
  const auto& iv = view.interval(m0.alpha(), m.alpha());
  std::vector<CombMap> out;
  for (const auto& a : iv.elements) out.emplace_back(m.pi(), a);
  return out;
}

long long moebius(const CombMap& m0, const CombMap& m) {
  require_same_pi(m0, m);
  SwitchPosetView view(m.pi());
  const auto& iv = view.interval(m0.alpha(), m.alpha());
  return iv.mu_top[iv.bottom];
}

MeetJoin lattice_meet_join(const CombMap& m1, const CombMap& m2, const CombMap& ambient) {
  require_same_pi(m1, ambient);
  require_same_pi(m2, ambient);
  SwitchPosetView view(ambient.pi());
  auto m0 = minimal_map(ambient);
  if (!view.leq(m1.alpha(), ambient.alpha()) || !view.leq(m2.alpha(), ambient.alpha()))
    throw MapError("meet/join: arguments must lie below the ambient map");
  const auto& iv = view.interval(m0.alpha(), ambient.alpha());
  const int K = static_cast<int>(iv.elements.size());
  auto index_of = [&](const std::vector<int>& a) {
    for (int i = 0; i < K; ++i)
      if (iv.elements[i] == a) return i;
    throw MapError("meet/join: argument is not above the minimal map");
  };
  int i1 = index_of(m1.alpha()), i2 = index_of(m2.alpha());
  // le[i][j]: element i <= element j
  auto le = [&](int i, int j) {
    return i == j || std::find(iv.above[i].begin(), iv.above[i].end(), j) != iv.above[i].end();
  };
  std::vector<int> lower, upper;
  for (int i = 0; i < K; ++i) {
    if (le(i, i1) && le(i, i2)) lower.push_back(i);
    if (le(i1, i) && le(i2, i)) upper.push_back(i);
  }
  int meet = -1, join = -1;
  for (int c : lower)
    if (std::all_of(lower.begin(), lower.end(), [&](int d) { return le(d, c); })) meet = c;
  for (int c : upper)
    if (std::all_of(upper.begin(), upper.end(), [&](int d) { return le(c, d); })) join = c;
  if (meet < 0 || join < 0) throw MapError("meet/join does not exist in this interval");
  return {CombMap(ambient.pi(), iv.elements[meet]), CombMap(ambient.pi(), iv.elements[join])};
}

// ---------------------------------------------------------------- melonic

namespace {

bool is_melon(const CombMap& m) {
  if (m.num_vertices() != 2 || m.degree(0) != m.degree(1)) return false;
  for (int e : m.legs(0))
    if (m.vertex_of(m.alpha()[e]) != 1) return false;
  return true;
}

bool melonic_rec(const CombMap& m, std::map<std::string, bool>& memo) {
  if (m.num_vertices() == 0) return true;
  if (m.num_vertices() % 2) return false;
  auto key = canonical_key(ColoredMap(m));
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  bool res = false;
  auto parts = split_components(ColoredMap(m));
  if (parts.size() > 1) {
    res = std::all_of(parts.begin(), parts.end(), [&](const ColoredMap& c) { return melonic_rec(c.map, memo); });
  } else if (m.num_vertices() == 2) {
    res = is_melon(m);
  } else {
    Geometry g(m.pi());
    int g0 = 0;
    g.comps(m.alpha(), &g0);
    std::set<std::vector<int>> tried;
    for_each_switch(m.alpha(), [&](std::vector<int>& x, int, int) {
      if (res || !tried.insert(x).second) return;
      int g1 = 0;
      g.comps(x, &g1);
      if (g1 != g0 + 1) return;
      auto halves = split_components(ColoredMap(CombMap(m.pi(), x)));
      for (int s = 0; s < 2 && !res; ++s) {
        const auto& a = halves[s].map;
        const auto& b = halves[1 - s].map;
        if (is_melon(a) && melonic_rec(b, memo)) res = true;
      }
    });
  }
  memo[key] = res;
  return res;
}

}  // namespace

bool is_melonic(const CombMap& m) {
  require_closed(m);
  std::map<std::string, bool> memo;
  return melonic_rec(m, memo);
}

long long fuss_catalan(int p, int k) {
  // C(pk+1, k) / (pk+1), computed with exact integer steps
  long long n = static_cast<long long>(p) * k + 1;
  long long c = 1;
  for (long long i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c / n;
}

CensusResult melonic_census(int p, int k) {
  if (p < 2 || k < 1) throw MapError("census needs p >= 2 and k >= 1");
  if (2 * k * p > 18) throw MapError("census budget exceeded: 2kp = " + std::to_string(2 * k * p) + " > 18");
  const int n = 2 * k, M = n * p;
  std::vector<int> pi(M);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < p; ++i) pi[v * p + i] = v * p + (i + 1) % p;

  // perfect matchings of the vertices
  std::vector<std::vector<int>> matchings;
  std::vector<int> partner(n, -1);
  std::function<void()> rec = [&]() {
    int a = -1;
    for (int v = 0; v < n; ++v)
      if (partner[v] < 0) {
        a = v;
        break;
      }
    if (a < 0) {
      matchings.push_back(partner);
      return;
    }
    for (int b = a + 1; b < n; ++b)
      if (partner[b] < 0) {
        partner[a] = b;
        partner[b] = a;
        rec();
        partner[a] = partner[b] = -1;
      }
  };
  rec();

  auto melons_alpha = [&](const std::vector<int>& mt) {
    std::vector<int> a(M);
    for (int v = 0; v < n; ++v)
      for (int i = 0; i < p; ++i) a[v * p + i] = mt[v] * p + i;
    return a;
  };

  SwitchPosetView view(pi);
  Geometry g(pi);
  CensusResult r;
  r.p = p;
  r.k = k;
  r.fuss_catalan = fuss_catalan(p, k);
  long long decompositions = 0;
  std::vector<int> choice(p, 0);
  const int nm = static_cast<int>(matchings.size());
  for (;;) {
    std::vector<int> alpha(M);
    for (int i = 0; i < p; ++i)
      for (int v = 0; v < n; ++v) alpha[v * p + i] = matchings[choice[i]][v] * p + i;
    int gam = 0;
    g.comps(alpha, &gam);
    if (gam == 1 && is_melonic(CombMap(pi, alpha))) {
      ++r.labeled_melonic;
      for (const auto& mt : matchings)
        if (view.leq(melons_alpha(mt), alpha)) ++decompositions;
    }
    int i = 0;
    while (i < p && ++choice[i] == nm) choice[i++] = 0;
    if (i == p) break;
  }
  long long fact = 1;
  for (int i = 2; i <= 2 * k - 1; ++i) fact *= i;
  if (decompositions % fact) throw MapError("census: decomposition count not divisible by (2k-1)!");
  r.enumerated = decompositions / fact;
  return r;
}

// ---------------------------------------------------------------- hat maps

std::string HatConfig::family(const std::string& c) const {
  auto it = family_of.find(c);
  return it == family_of.end() ? c : it->second;
}

bool is_monochromatic(const ColoredMap& cm, const std::vector<int>& vertices, const HatConfig& cfg) {
  std::string fam;
  for (int v : vertices) {
    const auto& c = cm.color(v);
    if (cfg.is_identity(c)) continue;
    auto f = cfg.family(c);
    if (fam.empty())
      fam = f;
    else if (f != fam)
      return false;
  }
  return true;
}

namespace {

// edge endpoints lie in different families (identity vertices belong to all)
bool mixed(const ColoredMap& cm, int e, const HatConfig& cfg, std::set<std::string>& fams) {
  const CombMap& m = cm.map;
  const auto& c1 = cm.color(m.vertex_of(e));
  const auto& c2 = cm.color(m.vertex_of(m.alpha()[e]));
  if (cfg.is_identity(c1) || cfg.is_identity(c2)) return false;
  auto f1 = cfg.family(c1), f2 = cfg.family(c2);
  if (f1 == f2) return false;
  fams = {f1, f2};
  return true;
}

}  // namespace

bool is_chromatic_switch(const ColoredMap& cm, int e1, int e2, const HatConfig& cfg) {
  std::set<std::string> a, b;
  if (!mixed(cm, e1, cfg, a) || !mixed(cm, e2, cfg, b)) return false;
  for (const auto& f : a)
    if (b.count(f)) return true;
  return false;
}

bool satisfies_p1(const ColoredMap& cm, const HatConfig& cfg) {
  const CombMap& m = cm.map;
  Geometry g(m.pi());
  int g0 = 0;
  auto comp = g.comps(m.alpha(), &g0);
  std::vector<std::vector<int>> members(g0);
  for (int v = 0; v < m.num_vertices(); ++v) members[comp[v]].push_back(v);
  std::vector<char> splittable(g0, 0);
  for_each_switch(m.alpha(), [&](std::vector<int>& x, int a, int) {
    int g1 = 0;
    g.comps(x, &g1);
    if (g1 == g0 + 1) splittable[comp[m.vertex_of(a)]] = 1;
  });
  for (int c = 0; c < g0; ++c)
    if (!is_monochromatic(cm, members[c], cfg) && splittable[c]) return false;
  return true;
}

std::vector<CombMap> hat_maps(const ColoredMap& cm, const HatConfig& cfg) {
  require_closed(cm.map);
  const auto& pi = cm.map.pi();
  Geometry g(pi);
  std::set<std::vector<int>> visited, found;
  std::function<void(const std::vector<int>&)> dfs = [&](const std::vector<int>& alpha) {
    if (!visited.insert(alpha).second) return;
    ColoredMap cur(CombMap(pi, alpha), cm.colors);
    if (satisfies_p1(cur, cfg)) {
      found.insert(alpha);
      return;
    }
    int g0 = 0;
    g.comps(alpha, &g0);
    std::vector<std::vector<int>> next;
    for_each_switch(alpha, [&](std::vector<int>& x, int a, int b) {
      int g1 = 0;
      g.comps(x, &g1);
      if (g1 == g0 + 1 && is_chromatic_switch(cur, a, b, cfg)) next.push_back(x);
    });
    for (const auto& x : next) dfs(x);
  };
  dfs(cm.map.alpha());
  std::vector<CombMap> out;
  for (const auto& a : found) out.emplace_back(pi, a);
  return out;
}

}  // namespace tfp
