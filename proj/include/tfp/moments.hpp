#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tfp/abstract_distribution.hpp"
#include "tfp/combmap.hpp"
#include "tfp/randgen.hpp"
#include "tfp/tensoreval.hpp"

namespace tfp {

enum class Method { exact, monte_carlo, sd_recursion };
std::string method_name(Method m);

struct MomentEstimate {
  double value = 0;
  double stderr = 0;  // 0 for exact values
  std::uint64_t samples = 0;
  Method method = Method::exact;
  std::uint64_t seed = 0;
  std::string lineage;  // seed-stream purpose tag
  std::optional<Rational> exact;
  int N = 0;
  std::string map_key;
};

// Running mean and variance (Welford).
class SampleStats {
 public:
  void add(double x);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0, m2_ = 0;
};

// ------------------------------------------------------------ random models

// Colors of a map bound to concrete or random tensors.
struct Model {
  std::map<std::string, DenseTensor> fixed;      // deterministic colors at the working N
  std::map<std::string, EntryLaw> wigner;        // independent symmetric random tensors
  std::optional<std::string> haar_color;         // Haar orthogonal matrix color
  std::set<std::string> rotated;                 // fixed colors replaced by A . U^p
  VarianceNorm norm = VarianceNorm::paper;
};

// Tensor orders per color read from the maps.
std::map<std::string, int> color_orders(const std::vector<ColoredMap>& maps);
std::map<std::string, DenseTensor> draw_model(const Model& model, const std::map<std::string, int>& orders, int N,
                                              std::mt19937_64& rng);

// Sample means of several maps over shared draws; sample s uses stream ("model", s).
std::vector<MomentEstimate> monte_carlo_moments(const std::vector<ColoredMap>& maps, const Model& model, int N,
                                                std::uint64_t samples, std::uint64_t seed);
MomentEstimate monte_carlo_moment(const ColoredMap& cm, const Model& model, int N, std::uint64_t samples,
                                  std::uint64_t seed);

// ------------------------------------------------------------ Gaussian

// Exact E_N[m] for closed (hyper)maps whose Gaussian colors are independent GOTE-type
// tensors. Sums every index assignment; Gaussian products use Isserlis per orbit class.
// Exact rational value when no deterministic color is present.
MomentEstimate exact_gaussian_moment(const ColoredMap& cm, int N, const std::set<std::string>& gaussian_colors,
                                     const std::map<std::string, DenseTensor>& fixed = {},
                                     VarianceNorm norm = VarianceNorm::paper);

// One elimination step: E_N[M] = sum_t coef_t N^{exponent_t} E_N[M_t], exact at every N.
struct GaussianTerm {
  int v = 0;                 // partner vertex
  std::vector<int> sigma;    // leg k of v meets leg sigma[k] of u
  ColoredMap map;
  int free_loops = 0;
  int exponent = 0;          // gamma(M_t) + loops - gamma(M) - (p-1)
  Rational coef;             // 1/(p-1)! or 1
};
struct GaussianStep {
  int u = -1;                // eliminated vertex (-1: no Gaussian vertex)
  std::vector<GaussianTerm> terms;
};
GaussianStep gaussian_sd_step(const ColoredMap& cm, const std::set<std::string>& gaussian_colors,
                              VarianceNorm norm = VarianceNorm::paper);

// Full recursive expansion at finite N (exact identity, deterministic remainder evaluated on `fixed`).
double gaussian_sd_expand(const ColoredMap& cm, int N, const std::set<std::string>& gaussian_colors,
                          const std::map<std::string, DenseTensor>& fixed = {},
                          VarianceNorm norm = VarianceNorm::paper);

// Large-N limit keeping the exponent-0 terms; Gaussian-free maps are read from base_limits.
MomentEstimate limit_moment_gaussian(const ColoredMap& cm, const std::set<std::string>& gaussian_colors,
                                     const AbstractDistribution& base_limits = {},
                                     VarianceNorm norm = VarianceNorm::paper);

// ------------------------------------------------------------ Haar / Weingarten

struct WeingartenTable {
  int k = 0, N = 0;
  std::vector<std::vector<int>> pairings;  // each a fixed-point-free involution of [k]
  std::vector<std::vector<double>> gram;   // N^{loops(p,q)}
  std::vector<std::vector<double>> wg;     // inverse of gram
  int loops(std::size_t i, std::size_t j) const;
  // Coset length k/2 - loops: the number of transpositions separating p and q.
  int coset_length(std::size_t i, std::size_t j) const { return k / 2 - loops(i, j); }
  double identity_error() const;  // max |gram * wg - I|
  // Wg(p,q) (-1)^{|s|} N^{k/2 + |s|} with |s| the coset length.
  double asymptotic_ratio(std::size_t i, std::size_t j) const;
};

std::vector<std::vector<int>> pairings(int k);
WeingartenTable weingarten_table(int k, int N);

// Exact E over a Haar orthogonal matrix (color u_color, degree-2 vertices).
MomentEstimate exact_haar_moment(const ColoredMap& cm, int N, const std::map<std::string, DenseTensor>& fixed,
                                 const std::string& u_color = "u");

// Terms of the Haar invariance identity: sum_t sign_t * N^{loops_t + gamma_t} E[eval(map_t)] = 0.
// Accepts an open map with two boundaries, or a closed map, which is opened at the
// edge leaving the second leg of its highest-indexed Haar vertex.
struct HaarTerm {
  int v = 0;
  int sign = 1;
  ColoredMap map;
  int free_loops = 0;
};
std::vector<HaarTerm> haar_sd_terms(const ColoredMap& cm, const std::string& u_color = "u");

// ------------------------------------------------------------ diagonal tensors

// Colors in `diagonal` stand for delta tensors (d_{i..i} = 1), colors in `rotated_diagonal`
// for delta . U^p with U the Haar color. Each such vertex becomes a hyper-edge (through p
// new U vertices when rotated): value(cm) = N^exponent * value(map). An index left on a
// single leg is closed by a degree-1 vertex of ones_color, to be bound to the all-ones vector.
struct DiagonalExpansion {
  ColoredMap map;
  int free_loops = 0;
  int exponent = 0;  // free_loops + gamma(map) - gamma(cm)
};
DiagonalExpansion expand_diagonal(const ColoredMap& cm, const std::set<std::string>& diagonal,
                                  const std::set<std::string>& rotated_diagonal, const std::string& u_color = "u",
                                  const std::string& ones_color = "j");

// ------------------------------------------------------------ residuals

enum class SdKind { gaussian, haar };
// gaussian: E[M] - sum of the leading terms (coef, exponent 0) with paired samples.
// haar: the identity's left side divided by the largest |term mean|.
MomentEstimate sd_residual(SdKind kind, const ColoredMap& cm, const Model& model, int N, std::uint64_t samples,
                           std::uint64_t seed);

// Three closed test maps: tr(U A U^T B), tr(U A U B) and tr(U A U^T B U A U^T C) for haar;
// f_3, the dumbbell and the tetrahedron in color "s" for gaussian.
std::vector<ColoredMap> sd_test_maps(SdKind kind);
// I + G / 2 per color, G with Gaussian entries of variance 1/N from stream ("fixed", k).
std::map<std::string, DenseTensor> sd_fixed_matrices(const std::set<std::string>& colors, int N,
                                                     std::uint64_t seed);

// ------------------------------------------------------------ rotated families

// Large-N limit of a connected map whose colors in `rotated` are conjugated by an
// independent Haar matrix. Monochromatic components are read from `marginals`.
MomentEstimate limit_moment_rotated(const ColoredMap& cm, const std::set<std::string>& rotated,
                                    const AbstractDistribution& marginals);

}  // namespace tfp
