#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "tfp/tensoreval.hpp"

namespace tfp {

enum class EntryLaw { gaussian, rademacher, uniform };
// paper: E X_i^2 = p / P_i with P_i the orbit size.
// unit_melon: E X_i^2 = p! / P_i, so the melon moment tends to 1.
enum class VarianceNorm { paper, unit_melon };

EntryLaw parse_law(const std::string& s);
std::string law_name(EntryLaw law);
VarianceNorm parse_norm(const std::string& s);
std::string norm_name(VarianceNorm n);

struct EnsembleSpec {
  int p = 2;
  int N = 2;
  EntryLaw law = EntryLaw::gaussian;
  std::uint64_t seed = 0;
  VarianceNorm norm = VarianceNorm::paper;
};

// Counter-based derivation: the stream for (purpose, index) depends only on the
// root seed and the path, never on how many other streams were drawn.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t root = 0) : root_(root) {}
  std::uint64_t root() const { return root_; }
  std::uint64_t derive(std::string_view purpose, std::uint64_t index) const;
  std::mt19937_64 engine(std::string_view purpose, std::uint64_t index) const;
  SeedStream child(std::string_view purpose, std::uint64_t index) const { return SeedStream(derive(purpose, index)); }

 private:
  std::uint64_t root_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Orbit size P_i of a multi-index and the class variance for a given normalization.
std::uint64_t orbit_size(const std::vector<int>& idx);
double class_variance(const std::vector<int>& idx, VarianceNorm norm = VarianceNorm::paper);

// Centered draw with the given variance.
double draw_entry(EntryLaw law, double variance, std::mt19937_64& rng);

// Unscaled symmetric X (constant on S_p orbits).
DenseTensor sample_symmetric_raw(int p, int N, EntryLaw law, VarianceNorm norm, std::mt19937_64& rng);
// W = X / N^{(p-1)/2}.
DenseTensor sample_symmetric_tensor(const EnsembleSpec& spec, std::mt19937_64& rng);
DenseTensor sample_symmetric_tensor(const EnsembleSpec& spec);

DenseTensor sample_haar_orthogonal(int N, std::mt19937_64& rng);
DenseTensor sample_haar_orthogonal(int N, std::uint64_t seed);

enum class FamilyKind { identity, diagonal, rank_one };
FamilyKind parse_family(const std::string& s);
// identity: I_N (p must be 2). diagonal: d_{i..i} = 1. rank_one: v^{⊗p} with
// v = N^a e_1, a = 1/2 for p = 1 and 0 otherwise (keeps every map bounded in N).
DenseTensor make_deterministic_family(FamilyKind kind, int p, int N);

}  // namespace tfp
