#include "tfp/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "tfp/wiring.hpp"

namespace tfp {

// ------------------------------------------------------------ cumulants

void CumulantTable::set(const ColoredMap& m, const Rational& kappa) {
  auto cf = canonical_form(m);
  table_[cf.key] = {cf.map, kappa};
}

std::optional<Rational> CumulantTable::find(const ColoredMap& m) const {
  auto it = table_.find(canonical_key(m));
  if (it == table_.end()) return std::nullopt;
  return it->second.second;
}

Rational CumulantTable::at(const ColoredMap& m) const {
  auto v = find(m);
  if (!v) throw MissingMoment("no cumulant for map " + to_text(m));
  return *v;
}

namespace {

void require_even(const ColoredMap& m) {
  if (!m.map.closed()) throw MapError("cumulants are defined on closed maps");
  if (m.map.kind() != MapKind::map) throw MapError("cumulants are defined on maps, not hypermaps");
  for (int v = 0; v < m.map.num_vertices(); ++v)
    if (m.map.degree(v) % 2)
      throw MapError("cumulants need even vertex degrees (vertex " + std::to_string(v + 1) + " has degree " +
                     std::to_string(m.map.degree(v)) + ")");
}

}  // namespace

std::vector<IntervalTerm> cumulant_interval(const ColoredMap& m) {
  require_even(m);
  CombMap m0 = minimal_map(m.map);
  SwitchPosetView view(m.map.pi());
  const auto& iv = view.interval(m0.alpha(), m.map.alpha());
  std::vector<IntervalTerm> out;
  out.reserve(iv.elements.size());
  for (std::size_t i = 0; i < iv.elements.size(); ++i)
    out.push_back({ColoredMap(CombMap(m.map.pi(), iv.elements[i]), m.colors), iv.mu_top[i]});
  return out;
}

Rational cumulant_transform(const AbstractDistribution& dist, const ColoredMap& m) {
  Rational k = 0;
  for (const auto& t : cumulant_interval(m))
    if (t.mu != 0) k += Rational(t.mu) * dist.at(t.map);
  return k;
}

CumulantTable cumulant_table(const AbstractDistribution& dist, const std::vector<ColoredMap>& maps) {
  CumulantTable out;
  for (const auto& m : maps)
    for (const auto& t : cumulant_interval(m))
      if (!out.find(t.map)) out.set(t.map, cumulant_transform(dist, t.map));
  return out;
}

Rational moments_from_cumulants(const CumulantTable& kappa, const ColoredMap& m) {
  Rational s = 0;
  for (const auto& t : cumulant_interval(m)) s += kappa.at(t.map);
  return s;
}

// ------------------------------------------------------------ budgets

HatConfig hat_config(const AbstractDistribution& dist) {
  HatConfig cfg;
  cfg.family_of = dist.families();
  cfg.identity_color = dist.identity_color();
  return cfg;
}

std::vector<ColoredMap> budget_maps(const MapBudget& budget, const HatConfig& cfg, bool non_monochromatic_only) {
  std::vector<std::pair<std::string, int>> cols(budget.orders.begin(), budget.orders.end());
  for (const auto& [c, d] : cols)
    if (d < 1) throw std::invalid_argument("color " + c + " needs a positive order");
  std::vector<ColoredMap> out;
  std::vector<std::string> colors;
  std::vector<int> degrees;
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int legs) {
    if (i == cols.size()) {
      if (colors.empty() || legs % 2) return;
      for (auto& cm : enumerate_closed_maps(colors, degrees, true)) {
        if (non_monochromatic_only) {
          std::vector<int> all(cm.map.num_vertices());
          for (int v = 0; v < cm.map.num_vertices(); ++v) all[v] = v;
          if (is_monochromatic(cm, all, cfg)) continue;
        }
        out.push_back(std::move(cm));
        if (out.size() > budget.max_maps)
          throw std::length_error("map budget exceeded (" + std::to_string(budget.max_maps) + " maps)");
      }
      return;
    }
    rec(i + 1, legs);
    std::size_t pushed = 0;
    while (static_cast<int>(colors.size()) < budget.max_vertices && legs + cols[i].second <= budget.max_half_edges) {
      colors.push_back(cols[i].first);
      degrees.push_back(cols[i].second);
      legs += cols[i].second;
      ++pushed;
      rec(i + 1, legs);
    }
    for (; pushed; --pushed) {
      colors.pop_back();
      degrees.pop_back();
    }
  };
  rec(0, 0);
  return out;
}

CumulantVerdict is_free_cumulant_test(const AbstractDistribution& dist, const MapBudget& budget, double tolerance) {
  for (const auto& [c, d] : budget.orders)
    if (d % 2) throw std::invalid_argument("the cumulant criterion needs even orders (color " + c + ")");
  CumulantVerdict out;
  for (const auto& m : budget_maps(budget, hat_config(dist), true)) {
    Rational k = cumulant_transform(dist, m);
    double a = std::abs(k.convert_to<double>());
    ++out.checked;
    out.max_abs = std::max(out.max_abs, a);
    bool bad = tolerance > 0 ? a > tolerance : k != 0;
    if (bad) {
      out.free = false;
      out.witnesses.push_back(m);
    }
  }
  return out;
}

// ------------------------------------------------------------ free products

namespace {

std::vector<int> all_vertices(const CombMap& m) {
  std::vector<int> v(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) v[i] = i;
  return v;
}

bool blocks_connected_in(const CombMap& m, const CombMap& h) {
  auto comp = components(h);
  detail::DisjointSets ds(m.num_vertices());
  for (int e = 0; e < m.size(); ++e) {
    int u = m.vertex_of(e), v = m.vertex_of(m.alpha()[e]);
    if (comp.of_vertex[u] == comp.of_vertex[v]) ds.unite(u, v);
  }
  std::vector<int> root(comp.gamma, -1);
  for (int v = 0; v < m.num_vertices(); ++v) {
    int& r = root[comp.of_vertex[v]];
    if (r < 0) r = ds.find(v);
    else if (r != ds.find(v)) return false;
  }
  return true;
}

class FreeProductEngine {
 public:
  FreeProductEngine(std::vector<Marginal> marginals, FreeProductMethod method, std::size_t hat_choice)
      : marg_(std::move(marginals)), method_(method), choice_(hat_choice) {
    for (std::size_t i = 0; i < marg_.size(); ++i)
      for (const auto& c : marg_[i].colors) {
        if (c == cfg_.identity_color) throw std::invalid_argument("the identity color cannot belong to a family");
        if (!family_.emplace(c, static_cast<int>(i)).second)
          throw std::invalid_argument("color " + c + " appears in two marginals");
        cfg_.family_of[c] = label(i);
      }
  }

  static std::string label(std::size_t i) { return "F" + std::to_string(i); }
  const HatConfig& cfg() const { return cfg_; }

  Rational value(const ColoredMap& m) {
    Rational p = 1;
    for (const auto& c : split_components(m)) {
      p *= connected(c);
      if (p == 0) break;
    }
    return p;
  }

  Rational connected(const ColoredMap& c) {
    if (c.map.num_vertices() == 0) return 1;
    auto cf = canonical_form(c);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(cf.key);
      if (it != memo_.end()) return it->second;
    }
    Rational r = compute(cf.map);
    std::lock_guard<std::mutex> lock(mu_);
    memo_.emplace(cf.key, r);
    return r;
  }

 private:
  int family_index(const std::string& color) const {
    auto it = family_.find(color);
    if (it == family_.end()) throw MissingMoment("color " + color + " belongs to no marginal");
    return it->second;
  }

  Rational compute(const ColoredMap& c) {
    const CombMap& m = c.map;
    int fam = -1;
    bool mono = true;
    for (int v = 0; v < m.num_vertices(); ++v) {
      int f = family_index(c.color(v));
      if (fam < 0) fam = f;
      else if (f != fam) mono = false;
    }
    if (mono) return marg_[fam].dist.at(c);
    if (satisfies_p1(c, cfg_)) return 0;  // minimal non-monochromatic
    if (method_ == FreeProductMethod::cumulants) return from_cumulants(c);
    auto hats = hat_maps(c, cfg_);
    if (hats.empty()) return 0;  // no hat map: the freeness condition holds vacuously
    if (method_ == FreeProductMethod::centering) {
      std::vector<CombMap> keep;
      for (auto& h : hats)
        if (blocks_connected_in(m, h)) keep.push_back(std::move(h));
      if (keep.empty()) throw std::logic_error("no hat map with connected blocks below " + to_text(c));
      hats = std::move(keep);
    }
    const CombMap& h = hats[choice_ % hats.size()];
    auto comp = components(h);
    const int k = comp.gamma;
    std::vector<std::vector<int>> members(k);
    for (int v = 0; v < m.num_vertices(); ++v) members[comp.of_vertex[v]].push_back(v);
    std::vector<Rational> cj(k);
    for (int j = 0; j < k; ++j) cj[j] = connected(restrict_to(ColoredMap(h, c.colors), members[j]));

    // m = m_b(x^0 + c 1): the fully centered term vanishes, so
    // m = -sum_{R nonempty} prod_{j in R} (-c_j) F(R), F(R) = m with the blocks of R set to 1.
    Rational total = 0;
    for (unsigned R = 1; R < (1u << k); ++R) {
      Rational coef = 1;
      for (int j = 0; j < k && coef != 0; ++j)
        if (R >> j & 1) coef *= -cj[j];
      if (coef == 0) continue;
      total -= coef * value(replace_by_identity(c, h, comp.of_vertex, R));
    }
    return total;
  }

  // Sum over [m0, m] of products of component cumulants; mixed components contribute 0.
  Rational from_cumulants(const ColoredMap& c) {
    Rational s = 0;
    for (const auto& t : cumulant_interval(c)) {
      Rational prod = 1;
      for (const auto& comp : split_components(t.map)) {
        prod *= mono_cumulant(comp);
        if (prod == 0) break;
      }
      s += prod;
    }
    return s;
  }

  Rational mono_cumulant(const ColoredMap& comp) {
    int fam = family_index(comp.color(0));
    for (int v = 1; v < comp.map.num_vertices(); ++v)
      if (family_index(comp.color(v)) != fam) return 0;
    auto key = canonical_key(comp);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = kappa_.find(key);
      if (it != kappa_.end()) return it->second;
    }
    Rational k = cumulant_transform(marg_[fam].dist, comp);
    std::lock_guard<std::mutex> lock(mu_);
    kappa_.emplace(key, k);
    return k;
  }

  // The blocks of R in h become identities: each leaving edge is rewired through the
  // pairing h imposes on the block's boundary.
  static ColoredMap replace_by_identity(const ColoredMap& c, const CombMap& h, const std::vector<int>& block,
                                        unsigned R) {
    const CombMap& m = c.map;
    auto removed = [&](int v) { return (R >> block[v] & 1) != 0; };
    Wiring w(c);
    for (int e = 0; e < m.size(); ++e) {
      int v = m.vertex_of(e), f = m.alpha()[e];
      if (!removed(v)) {
        w.link(e, f);
        continue;
      }
      if (block[m.vertex_of(f)] == block[v]) continue;  // internal to the block
      w.link(e, f);
      w.link(e, h.alpha()[e]);
    }
    for (int v = 0; v < m.num_vertices(); ++v)
      if (removed(v)) w.drop_vertex(v);
    return w.build().map;
  }

  std::vector<Marginal> marg_;
  FreeProductMethod method_;
  std::size_t choice_;
  HatConfig cfg_;
  std::map<std::string, int> family_;
  std::mutex mu_;
  std::map<std::string, Rational> memo_, kappa_;
};

}  // namespace

AbstractDistribution free_product(const std::vector<Marginal>& marginals, FreeProductMethod method,
                                  std::size_t hat_choice) {
  auto engine = std::make_shared<FreeProductEngine>(marginals, method, hat_choice);
  AbstractDistribution out;
  for (std::size_t i = 0; i < marginals.size(); ++i)
    for (const auto& c : marginals[i].colors) out.set_family(c, FreeProductEngine::label(i));
  out.set_rule([engine](const ColoredMap& c) -> std::optional<Rational> {
    try {
      return engine->connected(c);
    } catch (const MissingMoment&) {
      return std::nullopt;
    }
  });
  return out;
}

std::vector<CombMap> admissible_hats(const ColoredMap& cm, const HatConfig& cfg) {
  std::vector<CombMap> out;
  for (auto& h : hat_maps(cm, cfg))
    if (blocks_connected_in(cm.map, h)) out.push_back(std::move(h));
  return out;
}

// ------------------------------------------------------------ freeness statistic

std::vector<ColoredMap> hat_support(const std::vector<ColoredMap>& maps, const HatConfig& cfg) {
  std::map<std::string, ColoredMap> seen;
  for (const auto& m : maps)
    for (const auto& h : hat_maps(m, cfg))
      for (auto& c : split_components(ColoredMap(h, m.colors))) {
        auto cf = canonical_form(c);
        seen.emplace(cf.key, cf.map);
      }
  std::vector<ColoredMap> out;
  for (auto& [k, c] : seen) out.push_back(std::move(c));
  return out;
}

FreenessReport freeness_statistic(const AbstractDistribution& empirical, const HatConfig& cfg,
                                  const std::vector<ColoredMap>& budget, const FreenessOptions& opt) {
  FreenessReport rep;
  for (const auto& m : budget) {
    if (!m.map.closed() || !is_connected(m.map)) throw MapError("freeness budget maps must be closed and connected");
    ++rep.examined;
    if (is_monochromatic(m, all_vertices(m.map), cfg)) continue;
    auto hats = hat_maps(m, cfg);
    bool forced = true;
    for (const auto& h : hats) {
      bool has_zero_block = false;
      for (const auto& c : split_components(ColoredMap(h, m.colors))) {
        if (!is_monochromatic(c, all_vertices(c.map), cfg)) {
          has_zero_block = true;
          break;
        }
        double v = std::abs(empirical.value(c));
        if (v <= std::max(opt.z * empirical.stderr_of(c), opt.tol)) {
          has_zero_block = true;
          break;
        }
      }
      if (!has_zero_block) {
        forced = false;
        break;
      }
    }
    if (!forced) continue;
    double v = std::abs(empirical.value(m));
    rep.forced.emplace_back(m, v);
    rep.statistic = std::max(rep.statistic, v);
  }
  return rep;
}

// ------------------------------------------------------------ free CLT

namespace {

const std::string& single_color(const ColoredMap& m) {
  if (m.uncolored() || m.map.num_vertices() == 0) throw MapError("CLT query maps carry the color of a");
  for (const auto& c : m.colors)
    if (c != m.colors[0]) throw MapError("CLT query maps use a single color");
  return m.colors[0];
}

void require_even_vertices(int v) {
  if (v % 2) throw MapError("odd vertex count: the n^{-v/2} scaling is not rational");
}

void require_centered(const AbstractDistribution& a, const std::string& color, int p) {
  for (const auto& b : enumerate_closed_maps({color}, {p}, true))
    if (a.at(b) != 0) throw std::invalid_argument("CLT input is not centered: " + to_text(b) + " != 0");
}

Rational power(int n, int e) {
  Rational r = 1;
  for (int i = 0; i < std::abs(e); ++i) r *= n;
  return e >= 0 ? r : Rational(1) / r;
}

}  // namespace

Rational clt_cumulant(const AbstractDistribution& a, int n, const ColoredMap& connected) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  const int v = connected.map.num_vertices();
  require_even_vertices(v);
  single_color(connected);
  return power(n, 1 - v / 2) * cumulant_transform(a, connected);
}

Rational clt(const AbstractDistribution& a, int n, const ColoredMap& m) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  const auto& color = single_color(m);
  require_even(m);
  require_centered(a, color, m.map.degree(0));
  const int V = m.map.num_vertices();
  require_even_vertices(V);
  // prod over components of n^{1 - v_c/2} = n^{gamma - V/2}
  Rational s = 0;
  for (const auto& t : cumulant_interval(m)) {
    Rational prod = 1;
    for (const auto& c : split_components(t.map)) {
      prod *= cumulant_transform(a, c);
      if (prod == 0) break;
    }
    if (prod != 0) s += power(n, components(t.map.map).gamma) * prod;
  }
  return s * power(n, -V / 2);
}

std::vector<int> melon_sigma(const CombMap& m) {
  if (m.num_vertices() != 2 || !m.closed() || m.degree(0) != m.degree(1)) return {};
  std::vector<int> sigma;
  for (int e : m.legs(0)) {
    int f = m.alpha()[e];
    if (m.vertex_of(f) != 1) return {};
    sigma.push_back(m.leg_index(f));
  }
  return sigma;
}

Rational clt_limit(const std::map<std::vector<int>, Rational>& melon_moments, const ColoredMap& m) {
  auto kappa = [&](const ColoredMap& c) -> Rational {
    auto sigma = melon_sigma(c.map);
    if (sigma.empty()) return 0;
    auto it = melon_moments.find(sigma);
    if (it != melon_moments.end()) return it->second;
    std::vector<int> inv(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) inv[sigma[i]] = static_cast<int>(i);
    it = melon_moments.find(inv);
    if (it != melon_moments.end()) return it->second;
    throw MissingMoment("no melon moment for " + to_text(c));
  };
  Rational s = 0;
  for (const auto& t : cumulant_interval(m)) {
    Rational prod = 1;
    for (const auto& c : split_components(t.map)) {
      prod *= kappa(c);
      if (prod == 0) break;
    }
    s += prod;
  }
  return s;
}

// ------------------------------------------------------------ empirical

AbstractDistribution empirical_distribution(const Model& model, const std::vector<ColoredMap>& maps, int N,
                                            std::uint64_t samples, std::uint64_t seed) {
  for (const auto& m : maps)
    if (!m.map.closed() || !is_connected(m.map))
      throw MapError("empirical distributions take closed connected maps: " + to_text(m));
  AbstractDistribution out;
  auto est = monte_carlo_moments(maps, model, N, samples, seed);
  for (std::size_t i = 0; i < maps.size(); ++i) out.set(maps[i], est[i].value, est[i].stderr);
  return out;
}

// ------------------------------------------------------------ freeness setups

FreenessSetup parse_freeness_setup(const std::string& s) {
  if (s == "matrix-goe") return FreenessSetup::matrix_goe;
  if (s == "diagonal-rotated") return FreenessSetup::diagonal_rotated;
  throw std::invalid_argument("unknown freeness setup '" + s + "' (matrix-goe, diagonal-rotated)");
}

std::string freeness_setup_name(FreenessSetup s) {
  return s == FreenessSetup::matrix_goe ? "matrix-goe" : "diagonal-rotated";
}

namespace {

std::vector<ColoredMap> with_support(const std::vector<ColoredMap>& budget, const HatConfig& cfg) {
  std::map<std::string, ColoredMap> all;
  for (const auto& m : budget) all.emplace(canonical_key(m), m);
  for (auto& m : hat_support(budget, cfg)) all.emplace(canonical_key(m), std::move(m));
  std::vector<ColoredMap> out;
  for (auto& [k, m] : all) out.push_back(std::move(m));
  return out;
}

AbstractDistribution sample_rotated_diagonal(const std::vector<ColoredMap>& maps, int N, std::uint64_t samples,
                                             std::uint64_t seed) {
  // distinct hypermaps are contracted once per draw with a fixed plan
  struct Hyper {
    ColoredMap map;
    ContractionPlan plan;
  };
  std::vector<Hyper> hyper;
  std::map<std::string, std::size_t> slot;
  std::vector<std::pair<std::size_t, double>> use;  // (hypermap, scale) per map
  for (const auto& m : maps) {
    // an e-only map equals its d-only copy on every draw (orthogonal invariance)
    const bool has_d = std::count(m.colors.begin(), m.colors.end(), "d") > 0;
    auto x = has_d ? expand_diagonal(m, {"d"}, {"e"}, "u", "j") : expand_diagonal(m, {"e"}, {}, "u", "j");
    auto [it, fresh] = slot.emplace(canonical_key(x.map), hyper.size());
    if (fresh) hyper.push_back({x.map, plan_contraction(x.map.map, N)});
    const int gamma = components(x.map.map).gamma;
    use.emplace_back(it->second, std::pow(static_cast<double>(N), x.exponent - gamma));
  }
  const DenseTensor ones(1, N, std::vector<double>(N, 1.0));
  std::vector<SampleStats> stats(maps.size());
  std::vector<double> raw(hyper.size());
  std::vector<char> random(hyper.size());
  std::map<std::string, DenseTensor> bound{{"j", ones}};
  for (std::size_t i = 0; i < hyper.size(); ++i) {
    const auto& c = hyper[i].map.colors;
    random[i] = std::count(c.begin(), c.end(), "u") > 0;
    if (!random[i])
      raw[i] = c.empty() ? 1.0 : execute_plan(hyper[i].plan, bind_colors(hyper[i].map, bound)).value();
  }
  SeedStream root(seed);
  for (std::uint64_t s = 0; s < samples; ++s) {
    auto rng = root.engine("model", s);
    bound["u"] = sample_haar_orthogonal(N, rng);
    for (std::size_t i = 0; i < hyper.size(); ++i)
      if (random[i]) raw[i] = execute_plan(hyper[i].plan, bind_colors(hyper[i].map, bound)).value();
    for (std::size_t i = 0; i < maps.size(); ++i) stats[i].add(raw[use[i].first] * use[i].second);
  }
  AbstractDistribution out;
  for (std::size_t i = 0; i < maps.size(); ++i) out.set(maps[i], stats[i].mean(), stats[i].stderr());
  return out;
}

}  // namespace

FreenessRun run_freeness_setup(FreenessSetup setup, int N, std::uint64_t samples, std::uint64_t seed,
                               int max_vertices, const FreenessOptions& opt) {
  if (N < 2 || samples < 2) throw std::invalid_argument("freeness runs need N >= 2 and at least 2 samples");
  FreenessRun run;
  run.N = N;
  HatConfig cfg;
  const int p = setup == FreenessSetup::matrix_goe ? 2 : 3;
  const std::string a = setup == FreenessSetup::matrix_goe ? "D" : "d";
  const std::string b = setup == FreenessSetup::matrix_goe ? "W" : "e";
  cfg.family_of = {{a, "F0"}, {b, "F1"}};
  auto budget = budget_maps(MapBudget{{{a, p}, {b, p}}, max_vertices, p * max_vertices}, cfg, false);
  run.budget = budget.size();
  auto maps = with_support(budget, cfg);
  if (setup == FreenessSetup::matrix_goe) {
    Model model;
    DenseTensor D(2, N);
    for (int i = 0; i < N; ++i) D[static_cast<std::size_t>(i) * N + i] = i % 2 ? -1.0 : 1.0;
    model.fixed["D"] = D;
    model.wigner["W"] = EntryLaw::gaussian;
    run.empirical = empirical_distribution(model, maps, N, samples, seed);
  } else {
    run.empirical = sample_rotated_diagonal(maps, N, samples, seed);
  }
  for (const auto& [c, f] : cfg.family_of) run.empirical.set_family(c, f);
  run.report = freeness_statistic(run.empirical, cfg, budget, opt);
  return run;
}

}  // namespace tfp
