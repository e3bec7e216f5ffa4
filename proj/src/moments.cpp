#include "tfp/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Dense>

#include "tfp/wiring.hpp"

namespace tfp {

std::string method_name(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::monte_carlo: return "monte_carlo";
    case Method::sd_recursion: return "sd_recursion";
  }
  return "?";
}

void SampleStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double SampleStats::stderr() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

namespace {

long long factorial(int n) {
  long long r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

std::vector<std::vector<int>> all_permutations(int p) {
  std::vector<int> s(p);
  std::iota(s.begin(), s.end(), 0);
  std::vector<std::vector<int>> out;
  do out.push_back(s);
  while (std::next_permutation(s.begin(), s.end()));
  return out;
}

double eval_with(const ColoredMap& cm, const std::map<std::string, DenseTensor>& a,
                 const std::map<std::string, DenseTensor>& b) {
  if (cm.map.num_vertices() == 0) return 1.0;
  VertexTensors x;
  for (int v = 0; v < cm.map.num_vertices(); ++v) {
    auto it = a.find(cm.color(v));
    if (it == a.end()) {
      it = b.find(cm.color(v));
      if (it == b.end()) throw ShapeError("no tensor bound to color '" + cm.color(v) + "'");
    }
    x.push_back(&it->second);
  }
  return eval_closed(cm, x);
}

double eval_fixed(const ColoredMap& cm, const std::map<std::string, DenseTensor>& fixed) {
  static const std::map<std::string, DenseTensor> none;
  return eval_with(cm, fixed, none);
}

int gamma_of(const CombMap& m) { return components(m).gamma; }

}  // namespace

// ------------------------------------------------------------ models

std::map<std::string, int> color_orders(const std::vector<ColoredMap>& maps) {
  std::map<std::string, int> out;
  for (const auto& cm : maps)
    for (int v = 0; v < cm.map.num_vertices(); ++v) {
      auto [it, fresh] = out.emplace(cm.color(v), cm.map.degree(v));
      if (!fresh && it->second != cm.map.degree(v))
        throw MapError("color '" + cm.color(v) + "' used with two different orders");
    }
  return out;
}

std::map<std::string, DenseTensor> draw_model(const Model& model, const std::map<std::string, int>& orders, int N,
                                              std::mt19937_64& rng) {
  std::map<std::string, DenseTensor> out;
  DenseTensor U;
  const bool need_u = !model.rotated.empty() || (model.haar_color && orders.count(*model.haar_color));
  if (need_u) U = sample_haar_orthogonal(N, rng);
  for (const auto& [color, p] : orders) {
    if (auto it = model.wigner.find(color); it != model.wigner.end()) {
      EnsembleSpec spec{p, N, it->second, 0, model.norm};
      out.emplace(color, sample_symmetric_tensor(spec, rng));
    } else if (model.haar_color && color == *model.haar_color) {
      if (p != 2) throw ShapeError("Haar color must have order 2");
      out.emplace(color, U);
    } else if (model.rotated.count(color)) {
      auto f = model.fixed.find(color);
      if (f == model.fixed.end()) throw ShapeError("rotated color '" + color + "' has no tensor");
      out.emplace(color, orbit_action(f->second, U));
    }
  }
  return out;
}

std::vector<MomentEstimate> monte_carlo_moments(const std::vector<ColoredMap>& maps, const Model& model, int N,
                                                std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  const auto orders = color_orders(maps);
  std::vector<SampleStats> stats(maps.size());
  const SeedStream root(seed);
  for (std::uint64_t s = 0; s < samples; ++s) {
    auto rng = root.engine("model", s);
    auto drawn = draw_model(model, orders, N, rng);
    for (std::size_t i = 0; i < maps.size(); ++i) stats[i].add(eval_with(maps[i], drawn, model.fixed));
  }
  std::vector<MomentEstimate> out;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    MomentEstimate e;
    e.value = stats[i].mean();
    e.stderr = stats[i].stderr();
    e.samples = samples;
    e.method = Method::monte_carlo;
    e.seed = seed;
    e.lineage = "model";
    e.N = N;
    e.map_key = canonical_key(maps[i]);
    out.push_back(e);
  }
  return out;
}

MomentEstimate monte_carlo_moment(const ColoredMap& cm, const Model& model, int N, std::uint64_t samples,
                                  std::uint64_t seed) {
  return monte_carlo_moments({cm}, model, N, samples, seed).front();
}

// ------------------------------------------------------------ exact Gaussian

MomentEstimate exact_gaussian_moment(const ColoredMap& cm, int N, const std::set<std::string>& gaussian_colors,
                                     const std::map<std::string, DenseTensor>& fixed, VarianceNorm norm) {
  const CombMap& m = cm.map;
  if (!m.closed()) throw MapError("exact moments need a closed map");
  MomentEstimate out;
  out.method = Method::exact;
  out.N = N;
  out.map_key = canonical_key(cm);

  // one label per alpha cycle
  std::vector<int> label(m.size(), -1);
  int L = 0;
  for (int e = 0; e < m.size(); ++e) {
    if (label[e] >= 0) continue;
    for (int f = e; label[f] < 0; f = m.alpha()[f]) label[f] = L;
    ++L;
  }
  checked_power(N, L, kMaxIntermediate);

  std::vector<int> gauss, det;
  std::map<std::string, int> color_id, count, order;
  for (int v = 0; v < m.num_vertices(); ++v) {
    const auto& c = cm.color(v);
    if (gaussian_colors.count(c)) {
      gauss.push_back(v);
      color_id.emplace(c, static_cast<int>(color_id.size()));
      ++count[c];
      order[c] = m.degree(v);
    } else {
      det.push_back(v);
    }
  }
  for (const auto& [c, k] : count)
    if (k % 2) {
      out.exact = Rational(0);
      out.value = 0;
      return out;
    }
  std::vector<const DenseTensor*> det_t;
  for (int v : det) {
    auto it = fixed.find(cm.color(v));
    if (it == fixed.end()) throw ShapeError("no tensor bound to color '" + cm.color(v) + "'");
    if (it->second.order() != m.degree(v) || it->second.dim() != N) throw ShapeError("tensor shape mismatch");
    det_t.push_back(&it->second);
  }

  // A class key packs (color, sorted index tuple); signature entries are (p, prod c_j!, k).
  using Sig = std::vector<std::array<long long, 3>>;
  std::map<Sig, std::pair<std::uint64_t, double>> acc;
  std::vector<int> idx(L, 0);
  std::vector<std::pair<std::uint64_t, int>> keys(gauss.size());  // (key, vertex)
  std::vector<int> tuple;
  while (true) {
    for (std::size_t g = 0; g < gauss.size(); ++g) {
      const int v = gauss[g];
      tuple.clear();
      for (int e : m.legs(v)) tuple.push_back(idx[label[e]]);
      std::sort(tuple.begin(), tuple.end());
      std::uint64_t key = static_cast<std::uint64_t>(color_id[cm.color(v)]);
      for (int t : tuple) key = key * static_cast<std::uint64_t>(N) + static_cast<std::uint64_t>(t);
      keys[g] = {key, v};
    }
    std::sort(keys.begin(), keys.end());
    bool zero = false;
    Sig sig;
    for (std::size_t a = 0; a < keys.size() && !zero;) {
      std::size_t b = a;
      while (b < keys.size() && keys[b].first == keys[a].first) ++b;
      const long long k = static_cast<long long>(b - a);
      if (k % 2) {
        zero = true;
        break;
      }
      const int v = keys[a].second;
      tuple.clear();
      for (int e : m.legs(v)) tuple.push_back(idx[label[e]]);
      std::sort(tuple.begin(), tuple.end());
      long long cf = 1;
      for (std::size_t i = 0, run = 1; i < tuple.size(); ++i) {
        if (i + 1 < tuple.size() && tuple[i + 1] == tuple[i]) {
          ++run;
        } else {
          cf *= factorial(static_cast<int>(run));
          run = 1;
        }
      }
      sig.push_back({static_cast<long long>(tuple.size()), cf, k});
      a = b;
    }
    if (!zero) {
      std::sort(sig.begin(), sig.end());
      double d = 1;
      for (std::size_t i = 0; i < det.size(); ++i) {
        std::size_t off = 0;
        for (int e : m.legs(det[i])) off = off * N + idx[label[e]];
        d *= (*det_t[i])[off];
      }
      auto& slot = acc[sig];
      slot.first += 1;
      slot.second += d;
    }
    int j = L - 1;
    while (j >= 0 && ++idx[j] == N) idx[j--] = 0;
    if (j < 0) break;
  }

  Rational total = 0;
  double total_d = 0;
  for (const auto& [sig, a] : acc) {
    Rational w = 1;
    for (const auto& [p, cf, k] : sig) {
      Rational var = norm == VarianceNorm::paper ? Rational(cf, factorial(static_cast<int>(p) - 1)) : Rational(cf);
      for (long long i = k - 1; i > 1; i -= 2) w *= i;  // (k-1)!!
      for (long long i = 0; i < k / 2; ++i) w *= var;
    }
    total += w * Rational(a.first);
    total_d += w.convert_to<double>() * a.second;
  }
  // W = X / N^{(p-1)/2}, closed maps carry 1/N^gamma
  long long half_exp = 0;
  for (const auto& [c, k] : count) half_exp += static_cast<long long>(order[c] - 1) * k;
  Rational scale = 1;
  for (long long i = 0; i < half_exp / 2 + gamma_of(m); ++i) scale /= N;
  if (det.empty()) {
    out.exact = total * scale;
    out.value = out.exact->convert_to<double>();
  } else {
    out.value = total_d * scale.convert_to<double>();
  }
  return out;
}

GaussianStep gaussian_sd_step(const ColoredMap& cm, const std::set<std::string>& gaussian_colors, VarianceNorm norm) {
  const CombMap& m = cm.map;
  if (!m.closed()) throw MapError("the Gaussian recursion needs a closed map");
  if (m.kind() != MapKind::map) throw MapError("the Gaussian recursion is defined on maps, not hypermaps");
  GaussianStep step;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (gaussian_colors.count(cm.color(v))) step.u = v;
  if (step.u < 0) return step;
  const int u = step.u;
  const int p = m.degree(u);
  const Rational coef = norm == VarianceNorm::paper ? Rational(1, factorial(p - 1)) : Rational(1);
  const int gamma = gamma_of(m);
  const auto perms = all_permutations(p);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (v == u || cm.color(v) != cm.color(u)) continue;
    for (const auto& sigma : perms) {
      Wiring w(cm);
      w.link_all_alpha();
      for (int k = 0; k < p; ++k) w.link(m.legs(v)[k], m.legs(u)[sigma[k]]);
      w.drop_vertex(u);
      w.drop_vertex(v);
      auto r = w.build();
      GaussianTerm t;
      t.v = v;
      t.sigma = sigma;
      t.free_loops = r.free_loops;
      t.exponent = gamma_of(r.map.map) + r.free_loops - gamma - (p - 1);
      t.map = std::move(r.map);
      t.coef = coef;
      step.terms.push_back(std::move(t));
    }
  }
  return step;
}

namespace {

double expand_rec(const ColoredMap& cm, int N, const std::set<std::string>& colors,
                  const std::map<std::string, DenseTensor>& fixed, VarianceNorm norm,
                  std::unordered_map<std::string, double>& memo) {
  const std::string key = canonical_key(cm);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  auto step = gaussian_sd_step(cm, colors, norm);
  double r = 0;
  if (step.u < 0) {
    r = eval_fixed(cm, fixed);
  } else {
    for (const auto& t : step.terms)
      r += t.coef.convert_to<double>() * std::pow(static_cast<double>(N), t.exponent) *
           expand_rec(t.map, N, colors, fixed, norm, memo);
  }
  memo.emplace(key, r);
  return r;
}

Rational limit_rec(const ColoredMap& cm, const std::set<std::string>& colors, const AbstractDistribution& base,
                   VarianceNorm norm, std::unordered_map<std::string, Rational>& memo) {
  if (cm.map.num_vertices() == 0) return 1;
  auto parts = split_components(cm);
  if (parts.size() > 1) {
    Rational r = 1;
    for (const auto& c : parts) r *= limit_rec(c, colors, base, norm, memo);
    return r;
  }
  const std::string key = canonical_key(cm);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  auto step = gaussian_sd_step(cm, colors, norm);
  Rational r = 0;
  if (step.u < 0) {
    r = base.at(cm);
  } else {
    for (const auto& t : step.terms) {
      if (t.exponent > 0) throw std::logic_error("positive N exponent in the Gaussian recursion");
      if (t.exponent == 0) r += t.coef * limit_rec(t.map, colors, base, norm, memo);
    }
  }
  memo.emplace(key, r);
  return r;
}

}  // namespace

double gaussian_sd_expand(const ColoredMap& cm, int N, const std::set<std::string>& gaussian_colors,
                          const std::map<std::string, DenseTensor>& fixed, VarianceNorm norm) {
  std::unordered_map<std::string, double> memo;
  return expand_rec(cm, N, gaussian_colors, fixed, norm, memo);
}

MomentEstimate limit_moment_gaussian(const ColoredMap& cm, const std::set<std::string>& gaussian_colors,
                                     const AbstractDistribution& base_limits, VarianceNorm norm) {
  std::unordered_map<std::string, Rational> memo;
  MomentEstimate out;
  out.method = Method::sd_recursion;
  out.exact = limit_rec(cm, gaussian_colors, base_limits, norm, memo);
  out.value = out.exact->convert_to<double>();
  out.map_key = canonical_key(cm);
  return out;
}

// ------------------------------------------------------------ Weingarten

std::vector<std::vector<int>> pairings(int k) {
  if (k < 0 || k % 2) throw std::invalid_argument("pairings need an even size");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k, -1);
  std::function<void()> rec = [&]() {
    int a = 0;
    while (a < k && cur[a] >= 0) ++a;
    if (a == k) {
      out.push_back(cur);
      return;
    }
    for (int b = a + 1; b < k; ++b) {
      if (cur[b] >= 0) continue;
      cur[a] = b, cur[b] = a;
      rec();
      cur[a] = cur[b] = -1;
    }
  };
  rec();
  return out;
}

namespace {
int pairing_loops(const std::vector<int>& p, const std::vector<int>& q) {
  const int k = static_cast<int>(p.size());
  std::vector<bool> seen(k, false);
  int loops = 0;
  for (int s = 0; s < k; ++s) {
    if (seen[s]) continue;
    ++loops;
    int x = s;
    while (!seen[x]) {
      seen[x] = true;
      seen[p[x]] = true;
      x = q[p[x]];
    }
  }
  return loops;
}
}  // namespace

int WeingartenTable::loops(std::size_t i, std::size_t j) const { return pairing_loops(pairings[i], pairings[j]); }

double WeingartenTable::identity_error() const {
  const std::size_t n = pairings.size();
  double err = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t t = 0; t < n; ++t) s += gram[i][t] * wg[t][j];
      err = std::max(err, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return err;
}

double WeingartenTable::asymptotic_ratio(std::size_t i, std::size_t j) const {
  const int s = coset_length(i, j);
  return wg[i][j] * (s % 2 ? -1.0 : 1.0) * std::pow(static_cast<double>(N), k / 2.0 + s);
}

WeingartenTable weingarten_table(int k, int N) {
  if (k < 2 || k % 2 || k > 8) throw std::invalid_argument("Weingarten tables cover k = 2, 4, 6, 8");
  if (N < 1) throw std::invalid_argument("N must be positive");
  WeingartenTable t;
  t.k = k;
  t.N = N;
  t.pairings = pairings(k);
  const int n = static_cast<int>(t.pairings.size());
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = std::pow(static_cast<double>(N), pairing_loops(t.pairings[i], t.pairings[j]));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  if (!lu.isInvertible()) throw std::domain_error("Gram matrix is singular for k=" + std::to_string(k) + ", N=" + std::to_string(N));
  Eigen::MatrixXd W = lu.inverse();
  t.gram.assign(n, std::vector<double>(n));
  t.wg.assign(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      t.gram[i][j] = G(i, j);
      t.wg[i][j] = W(i, j);
    }
  return t;
}

MomentEstimate exact_haar_moment(const ColoredMap& cm, int N, const std::map<std::string, DenseTensor>& fixed,
                                 const std::string& u_color) {
  const CombMap& m = cm.map;
  if (!m.closed()) throw MapError("exact moments need a closed map");
  std::vector<int> us;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (cm.color(v) == u_color) {
      if (m.degree(v) != 2) throw MapError("Haar vertices have degree 2");
      us.push_back(v);
    }
  MomentEstimate out;
  out.method = Method::exact;
  out.N = N;
  out.map_key = canonical_key(cm);
  const int k = static_cast<int>(us.size());
  if (k % 2) {
    out.value = 0;
    out.exact = Rational(0);
    return out;
  }
  if (k > 6) throw CapacityError("exact Haar moments support at most 6 Haar vertices");
  if (k == 0) {
    out.value = eval_fixed(cm, fixed);
    return out;
  }
  const auto tab = weingarten_table(k, N);
  const int gamma = gamma_of(m);
  double total = 0;
  for (std::size_t a = 0; a < tab.pairings.size(); ++a)
    for (std::size_t b = 0; b < tab.pairings.size(); ++b) {
      Wiring w(cm);
      w.link_all_alpha();
      for (int t = 0; t < k; ++t) {
        w.link(m.legs(us[t])[0], m.legs(us[tab.pairings[a][t]])[0]);
        w.link(m.legs(us[t])[1], m.legs(us[tab.pairings[b][t]])[1]);
        w.drop_vertex(us[t]);
      }
      auto r = w.build();
      const int e = r.free_loops + gamma_of(r.map.map) - gamma;
      total += tab.wg[a][b] * std::pow(static_cast<double>(N), e) * eval_fixed(r.map, fixed);
    }
  out.value = total;
  return out;
}

std::vector<HaarTerm> haar_sd_terms(const ColoredMap& cm, const std::string& u_color) {
  const CombMap& m = cm.map;
  if (m.kind() != MapKind::map) throw MapError("Haar identities are defined on maps");
  const int M = m.size();
  const int S1 = M, S2 = M + 1;  // boundary slots, added first as auxiliary nodes
  std::vector<int> partner(m.alpha());
  if (m.closed()) {
    int u0 = -1;
    for (int v = 0; v < m.num_vertices(); ++v)
      if (cm.color(v) == u_color) u0 = v;
    if (u0 < 0) throw MapError("no Haar vertex to open the map at");
    const int f2 = m.legs(u0)[1];
    partner[m.alpha()[f2]] = S1;
    partner[f2] = S2;
  } else {
    if (m.boundaries().size() != 2) throw MapError("the Haar identity needs exactly two boundary edges");
    partner[m.boundaries()[0]] = S1;
    partner[m.boundaries()[1]] = S2;
  }
  std::vector<HaarTerm> out;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (cm.color(v) != u_color) continue;
    if (m.degree(v) != 2) throw MapError("Haar vertices have degree 2");
    const int g2 = m.legs(v)[1];
    const int other = partner[g2];
    for (int swap = 0; swap < 2; ++swap) {
      Wiring w(cm);
      w.add_node();
      w.add_node();
      for (int h = 0; h < M; ++h)
        if (h != g2 && h != other) w.link(h, partner[h]);
      w.link(g2, swap ? S2 : S1);
      w.link(other, swap ? S1 : S2);
      auto r = w.build();
      out.push_back(HaarTerm{v, swap ? -1 : 1, std::move(r.map), r.free_loops});
    }
  }
  return out;
}

// ------------------------------------------------------------ residuals

MomentEstimate sd_residual(SdKind kind, const ColoredMap& cm, const Model& model, int N, std::uint64_t samples,
                           std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be at least 1");
  MomentEstimate out;
  out.method = Method::monte_carlo;
  out.N = N;
  out.samples = samples;
  out.seed = seed;
  out.map_key = canonical_key(cm);
  const SeedStream root(seed);
  if (kind == SdKind::gaussian) {
    std::set<std::string> colors;
    for (const auto& [c, law] : model.wigner) colors.insert(c);
    auto step = gaussian_sd_step(cm, colors, model.norm);
    if (step.u < 0) throw MapError("map has no Gaussian vertex");
    std::vector<const GaussianTerm*> lead;
    std::vector<ColoredMap> maps{cm};
    for (const auto& t : step.terms)
      if (t.exponent == 0) {
        lead.push_back(&t);
        maps.push_back(t.map);
      }
    const auto orders = color_orders(maps);
    SampleStats st;
    for (std::uint64_t s = 0; s < samples; ++s) {
      auto rng = root.engine("sd-gaussian", s);
      auto drawn = draw_model(model, orders, N, rng);
      double r = eval_with(cm, drawn, model.fixed);
      for (const auto* t : lead) r -= t->coef.convert_to<double>() * eval_with(t->map, drawn, model.fixed);
      st.add(r);
    }
    out.value = st.mean();
    out.stderr = st.stderr();
    out.lineage = "sd-gaussian";
    return out;
  }
  if (!model.haar_color) throw std::invalid_argument("Haar residual needs a Haar color");
  auto terms = haar_sd_terms(cm, *model.haar_color);
  std::vector<ColoredMap> maps{cm};
  for (const auto& t : terms) maps.push_back(t.map);
  const auto orders = color_orders(maps);
  std::vector<double> scale;
  for (const auto& t : terms) scale.push_back(t.sign * std::pow(static_cast<double>(N), t.free_loops + gamma_of(t.map.map)));
  std::vector<SampleStats> per(terms.size());
  SampleStats total;
  for (std::uint64_t s = 0; s < samples; ++s) {
    auto rng = root.engine("sd-haar", s);
    auto drawn = draw_model(model, orders, N, rng);
    double sum = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double x = scale[i] * eval_with(terms[i].map, drawn, model.fixed);
      per[i].add(x);
      sum += x;
    }
    total.add(sum);
  }
  double norm = 0;
  for (const auto& p : per) norm = std::max(norm, std::abs(p.mean()));
  if (norm == 0) norm = 1;
  out.value = total.mean() / norm;
  out.stderr = total.stderr() / norm;
  out.lineage = "sd-haar";
  return out;
}

// ------------------------------------------------------------ diagonal tensors

DiagonalExpansion expand_diagonal(const ColoredMap& cm, const std::set<std::string>& diagonal,
                                  const std::set<std::string>& rotated_diagonal, const std::string& u_color,
                                  const std::string& ones_color) {
  const CombMap& m = cm.map;
  if (!m.closed()) throw MapError("diagonal expansion needs a closed map");
  const int n = m.size();
  detail::DisjointSets ds(n);
  for (int e = 0; e < n; ++e) ds.unite(e, m.alpha()[e]);

  detail::ProtoMap proto;
  std::vector<int> gid_of;  // node of each gid
  auto leg = [&](int node) {
    gid_of.push_back(node);
    proto.priority.push_back(static_cast<long long>(gid_of.size()));
    return static_cast<int>(gid_of.size()) - 1;
  };
  std::vector<char> dropped(n, 0);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const auto& c = cm.color(v);
    const auto& legs = m.legs(v);
    if (diagonal.count(c)) {
      for (int e : legs) {
        ds.unite(e, legs[0]);
        dropped[e] = 1;
      }
    } else if (rotated_diagonal.count(c)) {
      int hub = -1;
      for (int e : legs) {
        int b = ds.add();
        if (hub < 0) hub = b;
        ds.unite(b, hub);
        proto.vertices.push_back({leg(e), leg(b)});
        proto.colors.push_back(u_color);
      }
    } else {
      std::vector<int> ids;
      for (int e : legs) ids.push_back(leg(e));
      proto.vertices.push_back(std::move(ids));
      proto.colors.push_back(c);
    }
  }
  const int nodes = static_cast<int>(ds.parent.size());
  std::map<int, std::vector<int>> cls;
  for (int node = 0; node < nodes; ++node) cls[ds.find(node)];
  for (int g = 0; g < static_cast<int>(gid_of.size()); ++g) cls[ds.find(gid_of[g])].push_back(g);
  DiagonalExpansion out;
  bool hyper = false;
  for (auto& [root, members] : cls) {
    if (members.empty()) {
      ++out.free_loops;
    } else if (members.size() == 1) {
      int g = leg(ds.add());
      proto.vertices.push_back({g});
      proto.colors.push_back(ones_color);
      proto.cycles.push_back({members[0], g});
    } else {
      hyper |= members.size() > 2;
      proto.cycles.push_back(members);
    }
  }
  proto.kind = hyper ? MapKind::hypermap : MapKind::map;
  if (proto.vertices.empty()) {
    out.map = ColoredMap(CombMap({}, {}), {});
  } else {
    out.map = detail::assemble(proto);
  }
  out.exponent = out.free_loops + components(out.map.map).gamma - components(m).gamma;
  return out;
}

std::vector<ColoredMap> sd_test_maps(SdKind kind) {
  if (kind == SdKind::haar)
    return {ColoredMap(build_map({{1, 2}, {3, 4}, {5, 6}, {7, 8}}, {{2, 3}, {4, 6}, {5, 7}, {8, 1}}),
                       {"u", "A", "u", "B"}),
            ColoredMap(build_map({{1, 2}, {3, 4}, {5, 6}, {7, 8}}, {{2, 3}, {4, 5}, {6, 7}, {8, 1}}),
                       {"u", "A", "u", "B"}),
            ColoredMap(build_map({{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}, {11, 12}, {13, 14}, {15, 16}},
                                 {{2, 3}, {4, 6}, {5, 7}, {8, 9}, {10, 11}, {12, 14}, {13, 15}, {16, 1}}),
                       {"u", "A", "u", "B", "u", "A", "u", "C"})};
  auto s = [](CombMap m) { return ColoredMap(m, std::vector<std::string>(m.num_vertices(), "s")); };
  return {s(melon(3)), s(build_map({{1, 2, 3}, {4, 5, 6}}, {{1, 2}, {4, 5}, {3, 6}})),
          s(build_map({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}},
                      {{1, 4}, {2, 7}, {3, 10}, {5, 8}, {6, 11}, {9, 12}}))};
}

std::map<std::string, DenseTensor> sd_fixed_matrices(const std::set<std::string>& colors, int N,
                                                     std::uint64_t seed) {
  std::map<std::string, DenseTensor> out;
  const SeedStream root(seed);
  std::uint64_t k = 0;
  for (const auto& c : colors) {
    auto rng = root.engine("fixed", k++);
    DenseTensor t(2, N);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.5 * draw_entry(EntryLaw::gaussian, 1.0 / N, rng);
    for (int i = 0; i < N; ++i) t[static_cast<std::size_t>(i) * N + i] += 1.0;
    out.emplace(c, std::move(t));
  }
  return out;
}

// ------------------------------------------------------------ rotated families

namespace {

Rational rotated_rec(const ColoredMap& cm, const std::set<std::string>& rotated, const AbstractDistribution& marg,
                     std::unordered_map<std::string, Rational>& memo) {
  const CombMap& m = cm.map;
  if (m.num_vertices() == 0) return 1;
  auto parts = split_components(cm);
  if (parts.size() > 1) {
    Rational r = 1;
    for (const auto& c : parts) r *= rotated_rec(c, rotated, marg, memo);
    return r;
  }
  const std::string key = canonical_key(cm);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  auto in1 = [&](int e) { return rotated.count(cm.color(m.vertex_of(e))) > 0; };
  std::vector<int> mixed;
  for (int e = 0; e < m.size(); ++e)
    if (in1(e) && !in1(m.alpha()[e])) mixed.push_back(e);
  Rational r = 0;
  if (mixed.empty()) {
    r = marg.at(cm);
  } else {
    const int e = mixed.front();
    const int ae = m.alpha()[e];
    for (int f : mixed) {
      if (f == e) continue;
      const int af = m.alpha()[f];
      for (int sign : {1, -1}) {
        std::vector<int> a(m.alpha());
        if (sign > 0) {
          a[e] = f, a[f] = e, a[ae] = af, a[af] = ae;
        } else {
          a[e] = af, a[af] = e, a[ae] = f, a[f] = ae;
        }
        ColoredMap next(CombMap(m.pi(), a), cm.colors);
        if (gamma_of(next.map) != 2) continue;
        r += sign * rotated_rec(next, rotated, marg, memo);
      }
    }
  }
  memo.emplace(key, r);
  return r;
}

}  // namespace

MomentEstimate limit_moment_rotated(const ColoredMap& cm, const std::set<std::string>& rotated,
                                    const AbstractDistribution& marginals) {
  if (!cm.map.closed() || cm.map.kind() != MapKind::map) throw MapError("rotated limits need a closed map");
  std::unordered_map<std::string, Rational> memo;
  MomentEstimate out;
  out.method = Method::sd_recursion;
  out.exact = rotated_rec(cm, rotated, marginals, memo);
  out.value = out.exact->convert_to<double>();
  out.map_key = canonical_key(cm);
  return out;
}

}  // namespace tfp
