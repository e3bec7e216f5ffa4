#include "tfp/tensoreval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "tfp/kernels.hpp"

namespace tfp {

std::size_t checked_power(int N, int p, std::size_t cap) {
  if (N < 1 || p < 0) throw ShapeError("dimension must be >= 1 and order >= 0");
  std::size_t s = 1;
  for (int i = 0; i < p; ++i) {
    if (s > cap / static_cast<std::size_t>(N))
      throw CapacityError("N^p = " + std::to_string(N) + "^" + std::to_string(p) + " exceeds the capacity of " +
                          std::to_string(cap) + " entries");
    s *= static_cast<std::size_t>(N);
  }
  return s;
}

// ---------------------------------------------------------------- DenseTensor

DenseTensor::DenseTensor(int order, int dim) : p_(order), n_(dim), data_(checked_power(dim, order), 0.0) {}

DenseTensor::DenseTensor(int order, int dim, std::vector<double> data) : p_(order), n_(dim), data_(std::move(data)) {
  if (data_.size() != checked_power(dim, order))
    throw ShapeError("tensor data has " + std::to_string(data_.size()) + " entries, expected N^p");
  for (double v : data_)
    if (!std::isfinite(v)) throw ShapeError("tensor entries must be finite");
}

DenseTensor DenseTensor::scalar(double v) { return DenseTensor(0, 1, {v}); }

std::size_t DenseTensor::offset(const std::vector<int>& idx) const {
  if (static_cast<int>(idx.size()) != p_) throw ShapeError("index has wrong length");
  std::size_t o = 0;
  for (int i : idx) {
    if (i < 0 || i >= n_) throw ShapeError("index out of range");
    o = o * n_ + i;
  }
  return o;
}

double& DenseTensor::at(const std::vector<int>& idx) { return data_[offset(idx)]; }
double DenseTensor::at(const std::vector<int>& idx) const { return data_[offset(idx)]; }

double DenseTensor::value() const {
  if (p_ != 0) throw ShapeError("value() needs an order-0 tensor");
  return data_[0];
}

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
  if (a.order() != b.order() || a.dim() != b.dim()) throw ShapeError("shape mismatch in sum");
  DenseTensor r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

DenseTensor operator*(double s, const DenseTensor& a) {
  DenseTensor r = a;
  for (auto& v : r.data()) v *= s;
  return r;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  if (a.size() != b.size()) throw ShapeError("shape mismatch");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

DenseTensor delta_pairs(int p, int N) {
  if (p % 2) throw ShapeError("1_p needs an even order");
  DenseTensor t(p, N);
  std::vector<int> idx(p, 0);
  for (std::size_t o = 0; o < t.size(); ++o) {
    bool ok = true;
    for (int k = 0; k + 1 < p; k += 2) ok &= idx[k] == idx[k + 1];
    if (ok) t[o] = 1.0;
    for (int k = p - 1; k >= 0 && ++idx[k] == N; --k) idx[k] = 0;
  }
  return t;
}

DenseTensor identity_matrix(int N) { return delta_pairs(2, N); }

// ---------------------------------------------------------------- IO

namespace {

constexpr char kMagic[8] = {'T', 'N', 'S', 'R', 'v', '1', '\0', '\0'};

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw ShapeError("truncated tensor file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_binary(std::ostream& os, const DenseTensor& t) {
  os.write(kMagic, 8);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.order()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.dim()));
  for (double v : t.data()) put_le<double>(os, v);
}

DenseTensor read_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ShapeError("not a TNSRv1 tensor file");
  auto p = static_cast<int>(get_le<std::uint32_t>(is));
  auto N = static_cast<int>(get_le<std::uint32_t>(is));
  std::vector<double> d(checked_power(N, p));
  for (auto& v : d) v = get_le<double>(is);
  return DenseTensor(p, N, std::move(d));
}

void write_csv(std::ostream& os, const DenseTensor& t) {
  for (int k = 0; k < t.order(); ++k) os << 'i' << (k + 1) << ',';
  os << "value\n";
  std::vector<int> idx(t.order(), 0);
  os.precision(17);
  for (std::size_t o = 0; o < t.size(); ++o) {
    for (int k = 0; k < t.order(); ++k) os << idx[k] + 1 << ',';
    os << t[o] << '\n';
    for (int k = t.order() - 1; k >= 0 && ++idx[k] == t.dim(); --k) idx[k] = 0;
  }
}

DenseTensor read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ShapeError("empty CSV tensor");
  int p = static_cast<int>(std::count(line.begin(), line.end(), ','));
  std::vector<std::pair<std::vector<int>, double>> rows;
  int N = 1;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<int> idx;
    for (int k = 0; k < p; ++k) {
      if (!std::getline(ss, cell, ',')) throw ShapeError("CSV line " + std::to_string(lineno) + ": missing index");
      int i = std::stoi(cell);
      if (i < 1) throw ShapeError("CSV line " + std::to_string(lineno) + ": indices are 1-based");
      idx.push_back(i - 1);
      N = std::max(N, i);
    }
    if (!std::getline(ss, cell)) throw ShapeError("CSV line " + std::to_string(lineno) + ": missing value");
    rows.emplace_back(std::move(idx), std::stod(cell));
  }
  DenseTensor t(p, N);
  for (auto& [idx, v] : rows) t.at(idx) = v;
  return t;
}

DenseTensor load_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open tensor file " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return read_csv(f);
  return read_binary(f);
}

void save_tensor(const std::string& path, const DenseTensor& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write tensor file " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    write_csv(f, t);
  else
    write_binary(f, t);
}

VertexTensors bind_colors(const ColoredMap& cm, const std::map<std::string, DenseTensor>& by_color) {
  VertexTensors x;
  for (int v = 0; v < cm.map.num_vertices(); ++v) {
    auto it = by_color.find(cm.color(v));
    if (it == by_color.end()) throw ShapeError("no tensor bound to color '" + cm.color(v) + "'");
    x.push_back(&it->second);
  }
  return x;
}

// ---------------------------------------------------------------- planning

namespace {

struct Labels {
  std::vector<std::vector<int>> operands;
  std::vector<int> output;
  int count = 0;
};

Labels label_map(const CombMap& m) {
  Labels L;
  std::vector<int> lab(m.size(), -1);
  for (int e = 0; e < m.size(); ++e) {
    if (lab[e] >= 0 || m.alpha()[e] == e) continue;
    for (int f = e; lab[f] < 0; f = m.alpha()[f]) lab[f] = L.count;
    ++L.count;
  }
  for (int b : m.boundaries()) {
    lab[b] = L.count++;
    L.output.push_back(lab[b]);
  }
  for (int v = 0; v < m.num_vertices(); ++v) {
    std::vector<int> ls;
    for (int e : m.legs(v)) ls.push_back(lab[e]);
    L.operands.push_back(std::move(ls));
  }
  return L;
}

std::vector<int> unique_in_order(const std::vector<int>& v) {
  std::vector<int> out;
  for (int x : v)
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  return out;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// labels needed outside operands i and j (other operands or the output)
std::vector<int> needed_elsewhere(const std::vector<std::vector<int>>& ops, const std::vector<int>& output,
                                  std::size_t i, std::size_t j) {
  std::vector<int> need(output);
  for (std::size_t k = 0; k < ops.size(); ++k)
    if (k != i && k != j)
      for (int l : ops[k]) need.push_back(l);
  return need;
}

struct PairShape {
  std::vector<int> batch, fa, fb, sum;
  std::vector<int> result() const {
    std::vector<int> r(batch);
    r.insert(r.end(), fa.begin(), fa.end());
    r.insert(r.end(), fb.begin(), fb.end());
    return r;
  }
};

PairShape pair_shape(const std::vector<int>& a, const std::vector<int>& b, const std::vector<int>& need) {
  PairShape s;
  for (int l : unique_in_order(a)) {
    bool inb = contains(b, l), nd = contains(need, l);
    if (inb && nd)
      s.batch.push_back(l);
    else if (inb)
      s.sum.push_back(l);
    else if (nd)
      s.fa.push_back(l);
  }
  for (int l : unique_in_order(b))
    if (!contains(a, l) && contains(need, l)) s.fb.push_back(l);
  return s;
}

double powd(int N, std::size_t k) { return std::pow(static_cast<double>(N), static_cast<double>(k)); }

}  // namespace

ContractionPlan plan_contraction(const CombMap& m, int N) {
  Labels L = label_map(m);
  ContractionPlan plan;
  plan.operand_labels = L.operands;
  plan.output_labels = L.output;
  plan.num_labels = L.count;
  plan.N = N;
  auto ops = L.operands;
  while (ops.size() > 1) {
    std::tuple<int, double, std::size_t, std::size_t> best{2, 0, 0, 0};
    bool have = false;
    PairShape best_shape;
    for (std::size_t i = 0; i < ops.size(); ++i)
      for (std::size_t j = i + 1; j < ops.size(); ++j) {
        bool shared = false;
        for (int l : ops[i]) shared |= contains(ops[j], l);
        auto s = pair_shape(ops[i], ops[j], needed_elsewhere(ops, L.output, i, j));
        std::tuple<int, double, std::size_t, std::size_t> key{shared ? 0 : 1, powd(N, s.result().size()), i, j};
        if (!have || key < best) {
          best = key;
          best_shape = s;
          have = true;
        }
      }
    auto [sh, size, i, j] = best;
    (void)sh;
    if (size > static_cast<double>(kMaxIntermediate))
      throw CapacityError("contraction intermediate of " + std::to_string(static_cast<long long>(size)) +
                          " entries exceeds the budget");
    ContractionStep st;
    st.lhs = static_cast<int>(i);
    st.rhs = static_cast<int>(j);
    st.result_labels = best_shape.result();
    st.result_size = static_cast<std::size_t>(size);
    st.flops = powd(N, best_shape.batch.size() + best_shape.fa.size() + best_shape.fb.size() + best_shape.sum.size());
    plan.flops += st.flops;
    plan.peak_size = std::max(plan.peak_size, st.result_size);
    plan.steps.push_back(st);
    ops[i] = st.result_labels;
    ops.erase(ops.begin() + static_cast<long>(j));
  }
  return plan;
}

// ---------------------------------------------------------------- execution

namespace {

struct Operand {
  std::vector<int> labels;
  std::vector<double> data;
};

// Generic relabel: out has labels `to` (distinct); each out entry reads `in` at the
// position where every label takes its out value; labels of `in` absent from `to` are summed.
Operand reshape(const Operand& in, const std::vector<int>& to, int N) {
  const int r = static_cast<int>(in.labels.size());
  std::vector<int> in_u = unique_in_order(in.labels);
  std::vector<int> summed;
  for (int l : in_u)
    if (!contains(to, l)) summed.push_back(l);
  Operand out;
  out.labels = to;
  out.data.assign(checked_power(N, static_cast<int>(to.size()), kMaxIntermediate), 0.0);
  std::vector<std::size_t> in_stride(r);
  for (int k = r - 1; k >= 0; --k) in_stride[k] = k == r - 1 ? 1 : in_stride[k + 1] * N;
  // stride of each distinct label inside `in`
  auto label_stride = [&](int l) {
    std::size_t s = 0;
    for (int k = 0; k < r; ++k)
      if (in.labels[k] == l) s += in_stride[k];
    return s;
  };
  std::vector<std::size_t> to_s, sum_s;
  for (int l : to) to_s.push_back(contains(in.labels, l) ? label_stride(l) : 0);
  for (int l : summed) sum_s.push_back(label_stride(l));
  const std::size_t nsum = checked_power(N, static_cast<int>(summed.size()), kMaxIntermediate);
  std::vector<int> oi(to.size(), 0);
  std::size_t base = 0;
  for (std::size_t o = 0; o < out.data.size(); ++o) {
    double acc = 0;
    std::vector<int> si(summed.size(), 0);
    std::size_t off = 0;
    for (std::size_t s = 0; s < nsum; ++s) {
      acc += in.data[base + off];
      for (int k = static_cast<int>(summed.size()) - 1; k >= 0; --k) {
        off += sum_s[k];
        if (++si[k] < N) break;
        off -= sum_s[k] * N;
        si[k] = 0;
      }
    }
    out.data[o] = acc;
    for (int k = static_cast<int>(to.size()) - 1; k >= 0; --k) {
      base += to_s[k];
      if (++oi[k] < N) break;
      base -= to_s[k] * N;
      oi[k] = 0;
    }
  }
  return out;
}

Operand contract(const Operand& a, const Operand& b, const PairShape& s, int N) {
  std::vector<int> la(s.batch), lb(s.batch);
  la.insert(la.end(), s.fa.begin(), s.fa.end());
  la.insert(la.end(), s.sum.begin(), s.sum.end());
  lb.insert(lb.end(), s.fb.begin(), s.fb.end());
  lb.insert(lb.end(), s.sum.begin(), s.sum.end());
  Operand A = reshape(a, la, N);
  Operand B = reshape(b, lb, N);
  const std::size_t nb = checked_power(N, static_cast<int>(s.batch.size()), kMaxIntermediate);
  const std::size_t M = checked_power(N, static_cast<int>(s.fa.size()), kMaxIntermediate);
  const std::size_t Nn = checked_power(N, static_cast<int>(s.fb.size()), kMaxIntermediate);
  const std::size_t K = checked_power(N, static_cast<int>(s.sum.size()), kMaxIntermediate);
  Operand C;
  C.labels = s.result();
  C.data.assign(nb * M * Nn, 0.0);
  for (std::size_t t = 0; t < nb; ++t)
    kernels::gemm_nt(M, Nn, K, A.data.data() + t * M * K, B.data.data() + t * Nn * K, C.data.data() + t * M * Nn);
  return C;
}

void check_inputs(const CombMap& m, const VertexTensors& x, int* N) {
  if (static_cast<int>(x.size()) != m.num_vertices())
    throw ShapeError("expected " + std::to_string(m.num_vertices()) + " tensors, got " + std::to_string(x.size()));
  *N = 1;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!x[v]) throw ShapeError("missing tensor for vertex " + std::to_string(v + 1));
    if (x[v]->order() != m.degree(v))
      throw ShapeError("vertex " + std::to_string(v + 1) + " has degree " + std::to_string(m.degree(v)) +
                       " but its tensor has order " + std::to_string(x[v]->order()));
    if (v == 0)
      *N = x[v]->dim();
    else if (x[v]->dim() != *N)
      throw ShapeError("tensors do not share the dimension N");
  }
}

}  // namespace

DenseTensor execute_plan(const ContractionPlan& plan, const VertexTensors& x) {
  const int N = plan.N;
  std::vector<Operand> ops;
  for (std::size_t v = 0; v < plan.operand_labels.size(); ++v) ops.push_back({plan.operand_labels[v], x[v]->data()});
  if (ops.empty()) return DenseTensor::scalar(1.0);
  for (const auto& st : plan.steps) {
    std::vector<std::vector<int>> labels;
    for (const auto& o : ops) labels.push_back(o.labels);
    auto s = pair_shape(ops[st.lhs].labels, ops[st.rhs].labels,
                        needed_elsewhere(labels, plan.output_labels, st.lhs, st.rhs));
    ops[st.lhs] = contract(ops[st.lhs], ops[st.rhs], s, N);
    ops.erase(ops.begin() + st.rhs);
  }
  Operand fin = reshape(ops[0], plan.output_labels, N);
  return DenseTensor(static_cast<int>(plan.output_labels.size()), N, std::move(fin.data));
}

DenseTensor eval_invariant(const ColoredMap& cm, const VertexTensors& x) {
  int N = 1;
  check_inputs(cm.map, x, &N);
  auto plan = plan_contraction(cm.map, N);
  DenseTensor r = execute_plan(plan, x);
  if (cm.map.closed()) {
    int gamma = components(cm.map).gamma;
    r[0] /= std::pow(static_cast<double>(N), gamma);
  }
  return r;
}

DenseTensor eval_invariant(const ColoredMap& cm, const std::map<std::string, DenseTensor>& by_color) {
  return eval_invariant(cm, bind_colors(cm, by_color));
}

double eval_closed(const ColoredMap& cm, const VertexTensors& x) {
  if (!cm.map.closed()) throw ShapeError("eval_closed needs a closed map");
  return eval_invariant(cm, x).value();
}

double eval_closed(const ColoredMap& cm, const std::map<std::string, DenseTensor>& by_color) {
  return eval_closed(cm, bind_colors(cm, by_color));
}

// ---------------------------------------------------------------- naive

namespace {

template <class T, class Get>
std::vector<T> naive_sum(const CombMap& m, int N, Get get) {
  Labels L = label_map(m);
  const std::size_t total = checked_power(N, L.count, std::size_t{1} << 26);
  std::vector<T> out(checked_power(N, static_cast<int>(L.output.size()), kMaxIntermediate), T(0));
  std::vector<int> val(L.count, 0);
  for (std::size_t it = 0; it < total; ++it) {
    T prod(1);
    for (std::size_t v = 0; v < L.operands.size(); ++v) {
      std::size_t off = 0;
      for (int l : L.operands[v]) off = off * N + val[l];
      prod *= get(v, off);
      if (prod == T(0)) break;
    }
    std::size_t o = 0;
    for (int l : L.output) o = o * N + val[l];
    out[o] += prod;
    for (int k = L.count - 1; k >= 0 && ++val[k] == N; --k) val[k] = 0;
  }
  if (m.closed()) {
    int gamma = components(m).gamma;
    T div(1);
    for (int g = 0; g < gamma; ++g) div *= T(N);
    out[0] /= div;
  }
  return out;
}

}  // namespace

DenseTensor naive_eval(const ColoredMap& cm, const VertexTensors& x) {
  int N = 1;
  check_inputs(cm.map, x, &N);
  auto out = naive_sum<double>(cm.map, N, [&](std::size_t v, std::size_t off) { return (*x[v])[off]; });
  return DenseTensor(static_cast<int>(cm.map.boundaries().size()), N, std::move(out));
}

std::vector<Rational> naive_eval_exact(const ColoredMap& cm, const std::vector<std::vector<Rational>>& x, int N) {
  const CombMap& m = cm.map;
  if (static_cast<int>(x.size()) != m.num_vertices()) throw ShapeError("one tensor per vertex expected");
  for (int v = 0; v < m.num_vertices(); ++v)
    if (x[v].size() != checked_power(N, m.degree(v))) throw ShapeError("tensor size does not match N^deg");
  return naive_sum<Rational>(m, N, [&](std::size_t v, std::size_t off) { return x[v][off]; });
}

// ---------------------------------------------------------------- orbit action

DenseTensor orbit_action(const DenseTensor& T, const DenseTensor& U) {
  const int p = T.order(), N = T.dim();
  if (U.order() != 2 || U.dim() != N) throw ShapeError("orbit_action needs an N x N matrix matching the tensor");
  if (p == 0) return T;
  std::vector<double> cur = T.data(), tmp(cur.size());
  const std::size_t rows = cur.size() / N;
  for (int step = 0; step < p; ++step) {
    // R[a, j] = sum_i cur[a, i] U[j, i]
    kernels::gemm_nt(rows, N, N, cur.data(), U.data().data(), tmp.data());
    // move the new last axis to the front
    for (std::size_t a = 0; a < rows; ++a)
      for (int j = 0; j < N; ++j) cur[j * rows + a] = tmp[a * N + j];
  }
  return DenseTensor(p, N, std::move(cur));
}

// ---------------------------------------------------------------- probe

ProbeTable probe_bounds(const std::function<std::map<std::string, DenseTensor>(int)>& family,
                        const std::vector<ColoredMap>& maps, const std::vector<int>& N_grid) {
  ProbeTable t;
  t.sup.assign(maps.size(), 0.0);
  for (int N : N_grid) {
    auto tensors = family(N);
    for (std::size_t i = 0; i < maps.size(); ++i) {
      double v = std::abs(eval_closed(maps[i], tensors));
      t.rows.push_back({static_cast<int>(i), N, v});
      t.sup[i] = std::max(t.sup[i], v);
    }
  }
  return t;
}

}  // namespace tfp
