#include "tfp/randgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace tfp {

EntryLaw parse_law(const std::string& s) {
  if (s == "gaussian") return EntryLaw::gaussian;
  if (s == "rademacher") return EntryLaw::rademacher;
  if (s == "uniform") return EntryLaw::uniform;
  throw std::invalid_argument("unknown entry law '" + s + "' (expected gaussian, rademacher or uniform)");
}

std::string law_name(EntryLaw law) {
  switch (law) {
    case EntryLaw::gaussian: return "gaussian";
    case EntryLaw::rademacher: return "rademacher";
    case EntryLaw::uniform: return "uniform";
  }
  return "?";
}

VarianceNorm parse_norm(const std::string& s) {
  if (s == "paper") return VarianceNorm::paper;
  if (s == "unit_melon" || s == "unit-melon") return VarianceNorm::unit_melon;
  throw std::invalid_argument("unknown variance normalization '" + s + "' (expected paper or unit_melon)");
}

std::string norm_name(VarianceNorm n) { return n == VarianceNorm::paper ? "paper" : "unit_melon"; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t SeedStream::derive(std::string_view purpose, std::uint64_t index) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : purpose) h = (h ^ c) * 0x100000001b3ULL;
  return splitmix64(splitmix64(splitmix64(root_) ^ h) ^ index);
}

std::mt19937_64 SeedStream::engine(std::string_view purpose, std::uint64_t index) const {
  return std::mt19937_64(derive(purpose, index));
}

std::uint64_t orbit_size(const std::vector<int>& idx) {
  std::vector<int> s(idx);
  std::sort(s.begin(), s.end());
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= s.size(); ++i) r *= i;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == s[i - 1]) {
      ++run;
      r /= run;
    } else {
      run = 1;
    }
  }
  return r;
}

double class_variance(const std::vector<int>& idx, VarianceNorm norm) {
  const int p = static_cast<int>(idx.size());
  double fact = 1;
  for (int i = 2; i <= p; ++i) fact *= i;
  double P = static_cast<double>(orbit_size(idx));
  return norm == VarianceNorm::paper ? p / P : fact / P;
}

double draw_entry(EntryLaw law, double variance, std::mt19937_64& rng) {
  const double s = std::sqrt(variance);
  switch (law) {
    case EntryLaw::gaussian: return s * std::normal_distribution<double>()(rng);
    case EntryLaw::rademacher: return (rng() >> 63) ? s : -s;
    case EntryLaw::uniform: return s * std::sqrt(3.0) * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  }
  throw std::invalid_argument("unknown entry law");
}

DenseTensor sample_symmetric_raw(int p, int N, EntryLaw law, VarianceNorm norm, std::mt19937_64& rng) {
  if (p < 1 || N < 1) throw ShapeError("order and dimension must be positive");
  DenseTensor t(p, N);
  std::vector<int> idx(p, 0);
  std::vector<std::size_t> stride(p, 1);
  for (int k = p - 2; k >= 0; --k) stride[k] = stride[k + 1] * N;
  while (true) {
    const double x = draw_entry(law, class_variance(idx, norm), rng);
    std::vector<int> perm(idx);
    do {
      std::size_t off = 0;
      for (int k = 0; k < p; ++k) off += stride[k] * perm[k];
      t[off] = x;
    } while (std::next_permutation(perm.begin(), perm.end()));
    // next non-decreasing multi-index
    int k = p - 1;
    while (k >= 0 && idx[k] == N - 1) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < p; ++j) idx[j] = idx[k];
  }
  return t;
}

DenseTensor sample_symmetric_tensor(const EnsembleSpec& spec, std::mt19937_64& rng) {
  DenseTensor t = sample_symmetric_raw(spec.p, spec.N, spec.law, spec.norm, rng);
  const double scale = std::pow(static_cast<double>(spec.N), -(spec.p - 1) / 2.0);
  for (auto& v : t.data()) v *= scale;
  return t;
}

DenseTensor sample_symmetric_tensor(const EnsembleSpec& spec) {
  auto rng = SeedStream(spec.seed).engine("tensor", 0);
  return sample_symmetric_tensor(spec, rng);
}

DenseTensor sample_haar_orthogonal(int N, std::mt19937_64& rng) {
  if (N < 1) throw ShapeError("dimension must be positive");
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) A(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd& R = qr.matrixQR();
  for (int j = 0; j < N; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  DenseTensor U(2, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) U[static_cast<std::size_t>(i) * N + j] = Q(i, j);
  return U;
}

DenseTensor sample_haar_orthogonal(int N, std::uint64_t seed) {
  auto rng = SeedStream(seed).engine("haar", 0);
  return sample_haar_orthogonal(N, rng);
}

FamilyKind parse_family(const std::string& s) {
  if (s == "identity") return FamilyKind::identity;
  if (s == "diagonal" || s.rfind("diagonal_", 0) == 0) return FamilyKind::diagonal;
  if (s == "rank_one" || s == "rank-one") return FamilyKind::rank_one;
  throw std::invalid_argument("unknown family '" + s + "' (expected identity, diagonal or rank_one)");
}

DenseTensor make_deterministic_family(FamilyKind kind, int p, int N) {
  switch (kind) {
    case FamilyKind::identity:
      if (p != 2) throw ShapeError("identity family has order 2");
      return identity_matrix(N);
    case FamilyKind::diagonal: {
      DenseTensor t(p, N);
      std::size_t step = 0, s = 1;
      for (int k = 0; k < p; ++k, s *= N) step += s;
      for (int i = 0; i < N; ++i) t[i * step] = 1.0;
      return t;
    }
    case FamilyKind::rank_one: {
      DenseTensor t(p, N);
      t[0] = p == 1 ? std::sqrt(static_cast<double>(N)) : 1.0;
      return t;
    }
  }
  throw std::invalid_argument("unknown family");
}

}  // namespace tfp
