#include "tfp/combmap.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "tfp/wiring.hpp"

namespace tfp {

namespace {

std::string edge_name(int e) { return std::to_string(e + 1); }

void check_bijection(const std::vector<int>& img, const char* what) {
  std::vector<char> seen(img.size(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    int j = img[i];
    if (j < 0 || j >= static_cast<int>(img.size()))
      throw MapError(std::string(what) + ": image of edge " + edge_name(static_cast<int>(i)) +
                     " out of range");
    if (seen[j]) throw MapError(std::string(what) + ": edge " + edge_name(j) + " hit twice");
    seen[j] = 1;
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------- Permutation

Permutation::Permutation(std::vector<int> images) : img_(std::move(images)) {
  check_bijection(img_, "permutation");
}

Permutation Permutation::identity(int m) {
  std::vector<int> v(m);
  std::iota(v.begin(), v.end(), 0);
  return Permutation(std::move(v));
}

Permutation Permutation::from_cycles(int m, const std::vector<std::vector<int>>& cycles) {
  std::vector<int> img(m);
  std::iota(img.begin(), img.end(), 0);
  std::vector<char> seen(m, 0);
  for (const auto& c : cycles) {
    for (std::size_t k = 0; k < c.size(); ++k) {
      int a = c[k] - 1;
      if (a < 0 || a >= m) throw MapError("cycle entry " + std::to_string(c[k]) + " out of range");
      if (seen[a]) throw MapError("edge " + std::to_string(c[k]) + " appears twice");
      seen[a] = 1;
      img[a] = c[(k + 1) % c.size()] - 1;
    }
  }
  return Permutation(std::move(img));
}

std::vector<int> Permutation::images_1based() const {
  std::vector<int> v(img_);
  for (int& x : v) ++x;
  return v;
}

std::vector<std::vector<int>> Permutation::cycles(bool with_fixed_points) const {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(img_.size(), 0);
  for (int s = 0; s < size(); ++s) {
    if (seen[s]) continue;
    std::vector<int> c;
    for (int e = s; !seen[e]; e = img_[e]) {
      seen[e] = 1;
      c.push_back(e + 1);
    }
    if (c.size() > 1 || with_fixed_points) out.push_back(std::move(c));
  }
  return out;
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(img_.size());
  for (int i = 0; i < size(); ++i) inv[img_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation operator*(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw MapError("permutation size mismatch");
  std::vector<int> r(a.size());
  for (int i = 0; i < a.size(); ++i) r[i] = a(b(i));
  return Permutation(std::move(r));
}

bool Permutation::is_involution() const {
  for (int i = 0; i < size(); ++i)
    if (img_[img_[i]] != i) return false;
  return true;
}

// ---------------------------------------------------------------- CombMap

CombMap::CombMap(std::vector<int> pi, std::vector<int> alpha, MapKind kind)
    : pi_(std::move(pi)), alpha_(std::move(alpha)), kind_(kind) {
  if (pi_.size() != alpha_.size()) throw MapError("pi and alpha act on different edge sets");
  check_bijection(pi_, "pi");
  check_bijection(alpha_, "alpha");
  const int m = size();
  for (int e = 0; e < m; ++e) {
    if (kind_ == MapKind::map && alpha_[alpha_[e]] != e)
      throw MapError("alpha is not an involution at edge " + edge_name(e));
    if (kind_ == MapKind::hypermap && alpha_[e] == e)
      throw MapError("hypermap alpha fixes edge " + edge_name(e));
  }
  vertex_of_.assign(m, -1);
  leg_of_.assign(m, -1);
  for (int s = 0; s < m; ++s) {
    if (vertex_of_[s] >= 0) continue;
    std::vector<int> legs;
    for (int e = s; vertex_of_[e] < 0; e = pi_[e]) {
      vertex_of_[e] = static_cast<int>(verts_.size());
      leg_of_[e] = static_cast<int>(legs.size());
      legs.push_back(e);
    }
    verts_.push_back(std::move(legs));
  }
  for (int e = 0; e < m; ++e)
    if (alpha_[e] == e) bnd_.push_back(e);
}

ColoredMap::ColoredMap(CombMap m, std::vector<std::string> c) : map(std::move(m)), colors(std::move(c)) {
  if (colors.empty()) return;
  if (static_cast<int>(colors.size()) != map.num_vertices())
    throw MapError("expected " + std::to_string(map.num_vertices()) + " colors, got " +
                   std::to_string(colors.size()));
  std::map<std::string, int> arity;
  for (int v = 0; v < map.num_vertices(); ++v) {
    auto [it, fresh] = arity.emplace(colors[v], map.degree(v));
    if (!fresh && it->second != map.degree(v))
      throw MapError("color '" + colors[v] + "' used with arities " + std::to_string(it->second) +
                     " and " + std::to_string(map.degree(v)) + " (vertex at edge " +
                     edge_name(map.legs(v)[0]) + ")");
  }
}

const std::string& ColoredMap::color(int v) const {
  static const std::string none;
  return colors.empty() ? none : colors[v];
}

CombMap build_map(const std::vector<std::vector<int>>& pi_cycles,
                  const std::vector<std::vector<int>>& alpha_cycles, MapKind kind) {
  int m = 0;
  for (const auto& c : pi_cycles)
    for (int x : c) m = std::max(m, x);
  std::size_t count = 0;
  for (const auto& c : pi_cycles) count += c.size();
  if (static_cast<int>(count) != m) throw MapError("pi cycles do not partition 1.." + std::to_string(m));
  for (const auto& c : alpha_cycles) {
    if (kind == MapKind::map && c.size() > 2)
      throw MapError("alpha cycle of length " + std::to_string(c.size()) + " at edge " +
                     std::to_string(c[0]) + ": not an involution");
  }
  auto pi = Permutation::from_cycles(m, pi_cycles);
  auto alpha = Permutation::from_cycles(m, alpha_cycles);
  return CombMap(pi.images(), alpha.images(), kind);
}

CombMap star(int q) {
  if (q < 1) throw MapError("star needs q >= 1");
  std::vector<int> pi(q), alpha(q);
  for (int i = 0; i < q; ++i) {
    pi[i] = (i + 1) % q;
    alpha[i] = i;
  }
  return CombMap(pi, alpha);
}

CombMap bouquet(int p, const std::vector<int>& sigma) {
  if (p < 2 || p % 2) throw MapError("bouquet needs an even degree, got " + std::to_string(p));
  const int t = p / 2;
  std::vector<int> s = sigma;
  if (s.empty()) {
    s.resize(t);
    std::iota(s.begin(), s.end(), 0);
  }
  if (static_cast<int>(s.size()) != t) throw MapError("bouquet sigma must lie in S_{p/2}");
  Permutation check(s);
  std::vector<int> pi(p), alpha(p);
  for (int i = 0; i < p; ++i) pi[i] = (i + 1) % p;
  for (int i = 0; i < t; ++i) {
    int a = 2 * i, b = 2 * check(i) + 1;
    alpha[a] = b;
    alpha[b] = a;
  }
  return CombMap(pi, alpha);
}

CombMap melon(int p, const std::vector<int>& sigma) {
  if (p < 1) throw MapError("melon needs p >= 1");
  std::vector<int> s = sigma;
  if (s.empty()) {
    s.resize(p);
    std::iota(s.begin(), s.end(), 0);
  }
  if (static_cast<int>(s.size()) != p) throw MapError("melon sigma must lie in S_p");
  Permutation check(s);
  std::vector<int> pi(2 * p), alpha(2 * p);
  for (int i = 0; i < p; ++i) {
    pi[i] = (i + 1) % p;
    pi[p + i] = p + (i + 1) % p;
  }
  for (int i = 0; i < p; ++i) {
    alpha[i] = p + check(i);
    alpha[p + check(i)] = i;
  }
  return CombMap(pi, alpha);
}

CombMap canonical_family(Family kind, int p, const std::vector<int>& sigma) {
  switch (kind) {
    case Family::star: return star(p);
    case Family::bouquet: return bouquet(p, sigma);
    case Family::melon: return melon(p, sigma);
  }
  throw MapError("unknown family");
}

// ---------------------------------------------------------------- components

Components components(const CombMap& m) {
  detail::DisjointSets ds(m.num_vertices());
  for (int e = 0; e < m.size(); ++e) ds.unite(m.vertex_of(e), m.vertex_of(m.alpha()[e]));
  Components c;
  c.of_vertex.assign(m.num_vertices(), -1);
  std::vector<int> id(m.num_vertices(), -1);
  for (int v = 0; v < m.num_vertices(); ++v) {
    int r = ds.find(v);
    if (id[r] < 0) id[r] = c.gamma++;
    c.of_vertex[v] = id[r];
  }
  return c;
}

bool is_connected(const CombMap& m) { return components(m).gamma <= 1; }

CombMap disjoint_union(const CombMap& a, const CombMap& b) {
  if (a.kind() != b.kind()) throw MapError("cannot unite a map with a hypermap");
  std::vector<int> pi(a.pi()), alpha(a.alpha());
  const int off = a.size();
  for (int e = 0; e < b.size(); ++e) {
    pi.push_back(b.pi()[e] + off);
    alpha.push_back(b.alpha()[e] + off);
  }
  return CombMap(pi, alpha, a.kind());
}

ColoredMap disjoint_union(const ColoredMap& a, const ColoredMap& b) {
  if (a.uncolored() != b.uncolored() && a.map.num_vertices() && b.map.num_vertices())
    throw MapError("cannot unite colored and uncolored maps");
  std::vector<std::string> c(a.colors);
  c.insert(c.end(), b.colors.begin(), b.colors.end());
  return ColoredMap(disjoint_union(a.map, b.map), std::move(c));
}

ColoredMap restrict_to(const ColoredMap& cm, const std::vector<int>& vertices) {
  const CombMap& m = cm.map;
  std::vector<int> keep_v(m.num_vertices(), 0);
  for (int v : vertices) keep_v[v] = 1;
  std::vector<int> newlabel(m.size(), -1);
  int n = 0;
  for (int e = 0; e < m.size(); ++e)
    if (keep_v[m.vertex_of(e)]) newlabel[e] = n++;
  std::vector<int> pi(n), alpha(n);
  for (int e = 0; e < m.size(); ++e) {
    if (newlabel[e] < 0) continue;
    pi[newlabel[e]] = newlabel[m.pi()[e]];
    int a = m.alpha()[e];
    if (m.kind() == MapKind::map) {
      alpha[newlabel[e]] = newlabel[a] >= 0 ? newlabel[a] : newlabel[e];
    } else {
      // skip dropped members of the hyper-edge
      while (newlabel[a] < 0) a = m.alpha()[a];
      alpha[newlabel[e]] = newlabel[a];
    }
  }
  std::vector<std::string> colors;
  if (!cm.uncolored())
    for (int v = 0; v < m.num_vertices(); ++v)
      if (keep_v[v]) colors.push_back(cm.colors[v]);
  MapKind kind = m.kind();
  if (kind == MapKind::hypermap)
    for (int e = 0; e < n; ++e)
      if (alpha[e] == e) throw MapError("restriction leaves a hyper-edge with a single slot");
  return ColoredMap(CombMap(pi, alpha, kind), colors);
}

std::vector<ColoredMap> split_components(const ColoredMap& cm) {
  Components c = components(cm.map);
  std::vector<std::vector<int>> groups(c.gamma);
  for (int v = 0; v < cm.map.num_vertices(); ++v) groups[c.of_vertex[v]].push_back(v);
  std::vector<ColoredMap> out;
  out.reserve(groups.size());
  for (auto& g : groups) out.push_back(restrict_to(cm, g));
  return out;
}

// ---------------------------------------------------------------- assembly

namespace detail {

DisjointSets::DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

int DisjointSets::add() {
  parent.push_back(static_cast<int>(parent.size()));
  return parent.back();
}

int DisjointSets::find(int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void DisjointSets::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

ColoredMap assemble(const ProtoMap& proto) {
  int L = 0;
  for (const auto& v : proto.vertices) L += static_cast<int>(v.size());
  std::vector<std::vector<int>> succ(L);
  std::vector<int> indeg(L, 0);
  auto add_arc = [&](int a, int b) {
    succ[a].push_back(b);
    ++indeg[b];
  };
  for (const auto& v : proto.vertices)
    for (std::size_t k = 1; k < v.size(); ++k) add_arc(v[0], v[k]);
  for (std::size_t r = 1; r < proto.boundaries.size(); ++r)
    add_arc(proto.boundaries[r - 1], proto.boundaries[r]);

  using Item = std::pair<long long, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  for (int g = 0; g < L; ++g)
    if (!indeg[g]) ready.emplace(proto.priority[g], g);
  std::vector<int> label(L, -1);
  int next = 0;
  while (!ready.empty()) {
    int g = ready.top().second;
    ready.pop();
    label[g] = next++;
    for (int h : succ[g])
      if (--indeg[h] == 0) ready.emplace(proto.priority[h], h);
  }
  if (next != L) throw MapError("leg order and boundary order cannot both be preserved");

  std::vector<int> pi(L), alpha(L);
  std::iota(alpha.begin(), alpha.end(), 0);
  for (const auto& v : proto.vertices)
    for (std::size_t k = 0; k < v.size(); ++k) pi[label[v[k]]] = label[v[(k + 1) % v.size()]];
  for (const auto& c : proto.cycles)
    for (std::size_t k = 0; k < c.size(); ++k) alpha[label[c[k]]] = label[c[(k + 1) % c.size()]];

  CombMap m(pi, alpha, proto.kind);
  std::vector<std::string> colors;
  if (!proto.colors.empty()) {
    colors.resize(proto.vertices.size());
    for (std::size_t v = 0; v < proto.vertices.size(); ++v)
      colors[m.vertex_of(label[proto.vertices[v][0]])] = proto.colors[v];
  }
  return ColoredMap(std::move(m), std::move(colors));
}

}  // namespace detail

ColoredMap relabel(const ColoredMap& cm, const std::vector<int>& sigma) {
  const CombMap& m = cm.map;
  Permutation s(sigma);
  if (s.size() != m.size()) throw MapError("relabeling has wrong size");
  std::vector<int> pi(m.size()), alpha(m.size());
  for (int e = 0; e < m.size(); ++e) {
    pi[s(e)] = s(m.pi()[e]);
    alpha[s(e)] = s(m.alpha()[e]);
  }
  CombMap r(pi, alpha, m.kind());
  for (int v = 0; v < m.num_vertices(); ++v)
    if (r.leg_index(s(m.legs(v)[0])) != 0) throw MapError("relabeling does not preserve leg order");
  for (std::size_t k = 0; k < m.boundaries().size(); ++k)
    if (r.boundaries()[k] != s(m.boundaries()[k]))
      throw MapError("relabeling does not preserve boundary order");
  std::vector<std::string> colors;
  if (!cm.uncolored()) {
    colors.resize(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) colors[r.vertex_of(s(m.legs(v)[0]))] = cm.colors[v];
  }
  return ColoredMap(std::move(r), std::move(colors));
}

// ---------------------------------------------------------------- wiring

Wiring::Wiring(const ColoredMap& cm)
    : cm_(cm), ds_(cm.map.size()), keep_(cm.map.num_vertices(), true) {}

int Wiring::add_node() { return ds_.add(); }
void Wiring::link(int a, int b) { ds_.unite(a, b); }
void Wiring::link_alpha(int e) { ds_.unite(e, cm_.map.alpha()[e]); }
void Wiring::link_all_alpha() {
  for (int e = 0; e < cm_.map.size(); ++e) link_alpha(e);
}
void Wiring::drop_vertex(int v) { keep_[v] = false; }

WiringResult Wiring::build(bool allow_hyper) const {
  const CombMap& m = cm_.map;
  const int n = static_cast<int>(ds_.parent.size());
  std::vector<std::vector<int>> real(n);
  std::vector<int> open_rank(n, -1);
  for (std::size_t r = 0; r < open_.size(); ++r) {
    int root = ds_.find(open_[r]);
    if (open_rank[root] >= 0) throw MapError("two boundary slots identified with each other");
    open_rank[root] = static_cast<int>(r);
  }
  for (int e = 0; e < m.size(); ++e)
    if (keep_[m.vertex_of(e)]) real[ds_.find(e)].push_back(e);

  detail::ProtoMap proto;
  proto.kind = allow_hyper ? MapKind::hypermap : MapKind::map;
  std::vector<int> gid(m.size(), -1);
  int L = 0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!keep_[v]) continue;
    std::vector<int> legs;
    for (int e : m.legs(v)) {
      gid[e] = L++;
      legs.push_back(gid[e]);
      proto.priority.push_back(e);
    }
    proto.vertices.push_back(std::move(legs));
    if (!cm_.uncolored()) proto.colors.push_back(cm_.colors[v]);
  }
  WiringResult out;
  std::vector<std::pair<int, int>> bnd;  // (rank, gid)
  bool hyper = false;
  for (int root = 0; root < n; ++root) {
    if (ds_.find(root) != root) continue;
    const auto& legs = real[root];
    if (open_rank[root] >= 0) {
      if (legs.size() != 1) throw MapError("boundary slot must meet exactly one surviving leg");
      bnd.emplace_back(open_rank[root], gid[legs[0]]);
      continue;
    }
    if (legs.empty()) {
      ++out.free_loops;
      continue;
    }
    if (legs.size() == 1) throw MapError("dangling leg after rewiring at edge " + edge_name(legs[0]));
    if (legs.size() > 2) {
      if (!allow_hyper) throw MapError("rewiring produced a hyper-edge");
      hyper = true;
    }
    std::vector<int> c;
    for (int e : legs) c.push_back(gid[e]);
    proto.cycles.push_back(std::move(c));
  }
  std::sort(bnd.begin(), bnd.end());
  for (auto& b : bnd) proto.boundaries.push_back(b.second);
  if (allow_hyper && !hyper) {
    for (const auto& c : proto.cycles)
      if (c.size() != 2) hyper = true;
    if (!hyper && proto.boundaries.empty()) proto.kind = MapKind::map;
  }
  if (proto.kind == MapKind::hypermap && !proto.boundaries.empty())
    throw MapError("hypermaps cannot carry boundaries");
  out.map = detail::assemble(proto);
  return out;
}

// ---------------------------------------------------------------- canonical form

namespace {

struct Candidate {
  std::vector<int> code;
  std::vector<int> order;  // old edge labels in new-label order
};

Candidate bfs_code(const CombMap& m, const std::vector<int>& color_id, int root,
                   const std::vector<int>& bnd_rank) {
  const int M = m.size();
  std::vector<int> newlabel(M, -1);
  std::vector<int> order;
  std::vector<char> seen(m.num_vertices(), 0);
  std::vector<int> vq;
  auto visit = [&](int v) {
    seen[v] = 1;
    vq.push_back(v);
    for (int e : m.legs(v)) {
      newlabel[e] = static_cast<int>(order.size());
      order.push_back(e);
    }
  };
  visit(root);
  for (std::size_t h = 0; h < vq.size(); ++h) {
    for (int e : m.legs(vq[h])) {
      for (int f = m.alpha()[e]; f != e; f = m.alpha()[f])
        if (!seen[m.vertex_of(f)]) visit(m.vertex_of(f));
    }
  }
  Candidate c;
  c.order = order;
  c.code.reserve(3 * order.size() + 2 * vq.size());
  for (int v : vq) {
    c.code.push_back(color_id[v]);
    c.code.push_back(m.degree(v));
  }
  for (int e : order) c.code.push_back(newlabel[m.alpha()[e]]);
  for (int e : order) c.code.push_back(bnd_rank[e]);
  return c;
}

}  // namespace

CanonicalForm canonical_form(const ColoredMap& cm) {
  const CombMap& m = cm.map;
  std::vector<std::string> names(cm.colors);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<int> color_id(m.num_vertices(), 0);
  if (!cm.uncolored())
    for (int v = 0; v < m.num_vertices(); ++v)
      color_id[v] = static_cast<int>(std::lower_bound(names.begin(), names.end(), cm.colors[v]) -
                                     names.begin());
  std::vector<int> bnd_rank(m.size(), -1);
  for (std::size_t r = 0; r < m.boundaries().size(); ++r) bnd_rank[m.boundaries()[r]] = static_cast<int>(r);

  Components comp = components(m);
  std::vector<std::vector<int>> members(comp.gamma);
  for (int v = 0; v < m.num_vertices(); ++v) members[comp.of_vertex[v]].push_back(v);

  struct Block {
    bool open;
    int min_rank;
    Candidate best;
  };
  std::vector<Block> blocks;
  for (auto& vs : members) {
    int min_rank = -1, root = -1;
    for (int v : vs)
      for (int e : m.legs(v))
        if (bnd_rank[e] >= 0 && (min_rank < 0 || bnd_rank[e] < min_rank)) {
          min_rank = bnd_rank[e];
          root = v;
        }
    Block b{min_rank >= 0, min_rank, {}};
    if (b.open) {
      b.best = bfs_code(m, color_id, root, bnd_rank);
      // ranks relative to the component only matter through their order
    } else {
      bool first = true;
      for (int v : vs) {
        Candidate c = bfs_code(m, color_id, v, bnd_rank);
        if (first || c.code < b.best.code) b.best = std::move(c);
        first = false;
      }
    }
    blocks.push_back(std::move(b));
  }
  std::stable_sort(blocks.begin(), blocks.end(), [](const Block& a, const Block& b) {
    if (a.open != b.open) return a.open;
    if (a.open) return a.min_rank < b.min_rank;
    if (a.best.code.size() != b.best.code.size()) return a.best.code.size() < b.best.code.size();
    return a.best.code < b.best.code;
  });

  detail::ProtoMap proto;
  proto.kind = m.kind();
  std::vector<int> gid(m.size(), -1);
  long long pr = 0;
  std::vector<long long> prio_of(m.size());
  for (auto& b : blocks)
    for (int e : b.best.order) prio_of[e] = pr++;
  // vertices in order of their first leg's priority
  std::vector<int> vorder(m.num_vertices());
  std::iota(vorder.begin(), vorder.end(), 0);
  std::sort(vorder.begin(), vorder.end(),
            [&](int a, int b) { return prio_of[m.legs(a)[0]] < prio_of[m.legs(b)[0]]; });
  int L = 0;
  for (int v : vorder) {
    std::vector<int> legs;
    for (int e : m.legs(v)) {
      gid[e] = L++;
      legs.push_back(gid[e]);
      proto.priority.push_back(prio_of[e]);
    }
    proto.vertices.push_back(std::move(legs));
    if (!cm.uncolored()) proto.colors.push_back(cm.colors[v]);
  }
  std::vector<char> seen(m.size(), 0);
  for (int e = 0; e < m.size(); ++e) {
    if (seen[e] || m.alpha()[e] == e) continue;
    std::vector<int> c;
    for (int f = e; !seen[f]; f = m.alpha()[f]) {
      seen[f] = 1;
      c.push_back(gid[f]);
    }
    proto.cycles.push_back(std::move(c));
  }
  for (int b : m.boundaries()) proto.boundaries.push_back(gid[b]);

  CanonicalForm out;
  out.map = detail::assemble(proto);
  out.key = to_text(out.map);
  out.hash = fnv1a(out.key);
  return out;
}

CanonicalForm canonical_form(const CombMap& m) { return canonical_form(ColoredMap(m)); }

std::string canonical_key(const ColoredMap& cm) { return canonical_form(cm).key; }

// ---------------------------------------------------------------- compose

ColoredMap compose(const ColoredMap& outer, const std::vector<ColoredMap>& parts) {
  const CombMap& m = outer.map;
  if (static_cast<int>(parts.size()) != m.num_vertices())
    throw MapError("compose needs one part per vertex");
  detail::ProtoMap proto;
  proto.kind = MapKind::map;
  std::vector<int> offset(parts.size());
  std::vector<std::vector<int>> part_bnd_gid(parts.size());
  int L = 0;
  bool colored = false;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const CombMap& pm = parts[j].map;
    if (pm.kind() != MapKind::map) throw MapError("compose supports maps only");
    if (static_cast<int>(pm.boundaries().size()) != m.degree(static_cast<int>(j)))
      throw MapError("part " + std::to_string(j + 1) + " has " + std::to_string(pm.boundaries().size()) +
                     " boundaries but vertex degree is " + std::to_string(m.degree(static_cast<int>(j))));
    if (!parts[j].uncolored()) colored = true;
    offset[j] = L;
    for (int v = 0; v < pm.num_vertices(); ++v) {
      std::vector<int> legs;
      for (int e : pm.legs(v)) legs.push_back(L + e);
      proto.vertices.push_back(std::move(legs));
      proto.colors.push_back(parts[j].color(v));
    }
    for (int e = 0; e < pm.size(); ++e) proto.priority.push_back(L + e);
    for (int b : pm.boundaries()) part_bnd_gid[j].push_back(L + b);
    L += pm.size();
  }
  // priority must be indexed by gid, which equals L+e in vertex-leg order; rebuild
  {
    std::vector<long long> pr(L);
    for (int g = 0; g < L; ++g) pr[g] = g;
    proto.priority = pr;
  }
  if (!colored) proto.colors.clear();
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const CombMap& pm = parts[j].map;
    for (int e = 0; e < pm.size(); ++e) {
      int a = pm.alpha()[e];
      if (a != e && e < a) proto.cycles.push_back({offset[j] + e, offset[j] + a});
    }
  }
  std::vector<std::pair<int, int>> bnd;
  for (int v = 0; v < m.num_vertices(); ++v) {
    for (int k = 0; k < m.degree(v); ++k) {
      int leg = m.legs(v)[k];
      int other = m.alpha()[leg];
      int g = part_bnd_gid[v][k];
      if (other == leg) {
        int rank = static_cast<int>(std::lower_bound(m.boundaries().begin(), m.boundaries().end(), leg) -
                                    m.boundaries().begin());
        bnd.emplace_back(rank, g);
      } else if (leg < other) {
        int h = part_bnd_gid[m.vertex_of(other)][m.leg_index(other)];
        proto.cycles.push_back({g, h});
      }
    }
  }
  std::sort(bnd.begin(), bnd.end());
  for (auto& b : bnd) proto.boundaries.push_back(b.second);
  return detail::assemble(proto);
}

CombMap compose(const CombMap& m, const std::vector<CombMap>& parts) {
  std::vector<ColoredMap> cp;
  for (const auto& p : parts) cp.emplace_back(p);
  return compose(ColoredMap(m), cp).map;
}

// ---------------------------------------------------------------- surgery

ColoredMap surgery_close(const ColoredMap& cm) {
  const CombMap& m = cm.map;
  const auto& b = m.boundaries();
  if (b.size() % 2) throw MapError("close needs an even number of boundaries");
  std::vector<int> alpha(m.alpha());
  for (std::size_t j = 0; j + 1 < b.size(); j += 2) {
    alpha[b[j]] = b[j + 1];
    alpha[b[j + 1]] = b[j];
  }
  return ColoredMap(CombMap(m.pi(), alpha, m.kind()), cm.colors);
}

ColoredMap surgery_extend(const ColoredMap& cm, const std::string& color, int p) {
  const CombMap& m = cm.map;
  if (m.kind() != MapKind::map) throw MapError("extend applies to maps");
  if (static_cast<int>(m.boundaries().size()) < p)
    throw MapError("extend needs at least " + std::to_string(p) + " boundaries");
  const int M = m.size();
  std::vector<int> pi(m.pi()), alpha(m.alpha());
  for (int i = 0; i < p; ++i) {
    pi.push_back(M + (i + 1) % p);
    int e = m.boundaries()[i];
    alpha[e] = M + i;
    alpha.push_back(e);
  }
  std::vector<std::string> colors(cm.colors);
  if (cm.uncolored() && m.num_vertices() > 0) {
    if (!color.empty()) throw MapError("cannot add a colored vertex to an uncolored map");
  } else {
    colors.push_back(color);
  }
  return ColoredMap(CombMap(pi, alpha), colors);
}

ColoredMap surgery_remove(const ColoredMap& cm, int v, const std::vector<int>& sigma) {
  const CombMap& m = cm.map;
  if (v < 0 || v >= m.num_vertices()) throw MapError("no such vertex");
  if (m.num_vertices() < 2) throw MapError("remove needs at least two vertices");
  const int p = m.degree(v);
  std::vector<int> s = sigma;
  if (s.empty()) {
    s.resize(p);
    std::iota(s.begin(), s.end(), 0);
  }
  Permutation sp(s);
  if (sp.size() != p) throw MapError("remove: sigma must lie in S_p");
  Wiring w(cm);
  w.drop_vertex(v);
  std::vector<int> open(p);
  for (int k = 0; k < p; ++k) {
    int f = m.legs(v)[k];
    int nb = m.alpha()[f];
    if (nb == f) throw MapError("remove: vertex carries a boundary leg");
    if (m.vertex_of(nb) == v) throw MapError("remove: vertex carries a loop");
    open[sp(k)] = nb;
  }
  for (int e = 0; e < m.size(); ++e)
    if (m.vertex_of(e) != v && m.alpha()[e] != e && m.vertex_of(m.alpha()[e]) != v) w.link_alpha(e);
  std::vector<int> all_open(open);
  for (int b : m.boundaries()) all_open.push_back(b);
  w.set_open(all_open);
  return w.build().map;
}

ColoredMap surgery_permute(const ColoredMap& cm, const std::vector<int>& sigma) {
  const CombMap& m = cm.map;
  Permutation sp(sigma);
  if (sp.size() != static_cast<int>(m.boundaries().size())) throw MapError("permute: sigma must lie in S_q");
  Wiring w(cm);
  w.link_all_alpha();
  std::vector<int> open(sp.size());
  for (int k = 0; k < sp.size(); ++k) open[k] = m.boundaries()[sp(k)];
  w.set_open(open);
  return w.build().map;
}

WiringResult remove_identity_vertex(const ColoredMap& cm, int u) {
  const CombMap& m = cm.map;
  if (u < 0 || u >= m.num_vertices()) throw MapError("no such vertex");
  if (m.degree(u) % 2) throw MapError("identity vertices have even degree");
  Wiring w(cm);
  w.link_all_alpha();
  const auto& legs = m.legs(u);
  for (std::size_t j = 0; j + 1 < legs.size(); j += 2) w.link(legs[j], legs[j + 1]);
  w.drop_vertex(u);
  w.set_open(m.boundaries());
  return w.build();
}

// ---------------------------------------------------------------- codec

ParseError::ParseError(const std::string& msg, int l, int c)
    : MapError("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg), line(l), column(c) {}

namespace {

std::string cycles_text(const std::vector<int>& img) {
  std::ostringstream os;
  Permutation p(img);
  for (const auto& c : p.cycles(true)) {
    os << '(';
    for (std::size_t k = 0; k < c.size(); ++k) os << (k ? " " : "") << c[k];
    os << ')';
  }
  return os.str();
}

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  int line;
  int col() const { return static_cast<int>(i) + 1; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col()); }
  void ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
  }
  bool eat(char c) {
    ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(const std::string& word) {
    ws();
    if (s.compare(i, word.size(), word) != 0) fail("expected '" + word + "'");
    i += word.size();
  }
  std::vector<std::vector<int>> cycles() {
    std::vector<std::vector<int>> out;
    ws();
    while (i < s.size() && s[i] == '(') {
      ++i;
      std::vector<int> c;
      for (;;) {
        ws();
        if (i < s.size() && s[i] == ')') {
          ++i;
          break;
        }
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) fail("expected edge number");
        int x = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
          x = 10 * x + (s[i] - '0');
          if (x > 1000000) fail("edge number too large");
          ++i;
        }
        if (x == 0) fail("edge numbers are 1-based");
        c.push_back(x);
      }
      if (c.empty()) fail("empty cycle");
      out.push_back(std::move(c));
      ws();
    }
    return out;
  }
};

}  // namespace

std::string to_text(const ColoredMap& cm) {
  std::ostringstream os;
  os << (cm.map.kind() == MapKind::hypermap ? "HMAPv1" : "MAPv1") << " | pi: " << cycles_text(cm.map.pi())
     << " | alpha: " << cycles_text(cm.map.alpha()) << " | colors:";
  for (const auto& c : cm.colors) os << ' ' << c;
  return os.str();
}

std::string to_text(const CombMap& m) { return to_text(ColoredMap(m)); }

ColoredMap parse_map(const std::string& text, int line) {
  Cursor cur{text, 0, line};
  cur.ws();
  MapKind kind;
  if (text.compare(cur.i, 6, "HMAPv1") == 0) {
    kind = MapKind::hypermap;
    cur.i += 6;
  } else if (text.compare(cur.i, 5, "MAPv1") == 0) {
    kind = MapKind::map;
    cur.i += 5;
  } else {
    cur.fail("expected header MAPv1 or HMAPv1");
  }
  if (!cur.eat('|')) cur.fail("expected '|'");
  cur.expect("pi:");
  auto pic = cur.cycles();
  if (!cur.eat('|')) cur.fail("expected '|'");
  cur.expect("alpha:");
  std::size_t alpha_col = cur.i;
  auto alc = cur.cycles();
  if (!cur.eat('|')) cur.fail("expected '|'");
  cur.expect("colors:");
  std::vector<std::string> colors;
  for (;;) {
    cur.ws();
    if (cur.i >= text.size() || text[cur.i] == '#' || text[cur.i] == '\n') break;
    std::size_t start = cur.i;
    while (cur.i < text.size() && !std::isspace(static_cast<unsigned char>(text[cur.i]))) {
      if (text[cur.i] == '|' || text[cur.i] == '(' || text[cur.i] == ')') cur.fail("invalid character in color name");
      ++cur.i;
    }
    colors.push_back(text.substr(start, cur.i - start));
  }
  try {
    if (kind == MapKind::map)
      for (const auto& c : alc)
        if (c.size() > 2) {
          Cursor at{text, alpha_col, line};
          at.fail("alpha cycle (" + std::to_string(c[0]) + " ...) has length " + std::to_string(c.size()) +
                  ": not an involution");
        }
    return ColoredMap(build_map(pic, alc, kind), colors);
  } catch (const ParseError&) {
    throw;
  } catch (const MapError& e) {
    throw ParseError(e.what(), line, 1);
  }
}

std::vector<ColoredMap> parse_map_file(const std::string& contents) {
  std::vector<ColoredMap> out;
  std::istringstream is(contents);
  std::string ln;
  int line = 0;
  while (std::getline(is, ln)) {
    ++line;
    std::size_t k = ln.find_first_not_of(" \t\r");
    if (k == std::string::npos || ln[k] == '#') continue;
    out.push_back(parse_map(ln, line));
  }
  return out;
}

// ---------------------------------------------------------------- enumeration

std::vector<ColoredMap> enumerate_closed_maps(const std::vector<std::string>& colors,
                                              const std::vector<int>& degrees, bool connected_only) {
  if (colors.size() != degrees.size()) throw MapError("one color per degree expected");
  int M = 0;
  std::vector<int> pi;
  for (int d : degrees) {
    if (d < 1) throw MapError("degrees must be positive");
    for (int i = 0; i < d; ++i) pi.push_back(M + (i + 1) % d);
    M += d;
  }
  if (M % 2) return {};
  if (M > 16) throw MapError("enumeration budget exceeded (more than 16 directed edges)");
  std::map<std::string, ColoredMap> found;
  std::vector<int> alpha(M, -1);
  std::function<void()> rec = [&]() {
    int a = -1;
    for (int e = 0; e < M; ++e)
      if (alpha[e] < 0) {
        a = e;
        break;
      }
    if (a < 0) {
      ColoredMap cm(CombMap(pi, alpha), colors);
      if (connected_only && !is_connected(cm.map)) return;
      auto cf = canonical_form(cm);
      found.emplace(cf.key, cf.map);
      return;
    }
    for (int b = a + 1; b < M; ++b) {
      if (alpha[b] >= 0) continue;
      alpha[a] = b;
      alpha[b] = a;
      rec();
      alpha[a] = alpha[b] = -1;
    }
  };
  rec();
  std::vector<ColoredMap> out;
  for (auto& kv : found) out.push_back(kv.second);
  return out;
}

}  // namespace tfp
