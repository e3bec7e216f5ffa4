#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tfp/abstract_distribution.hpp"
#include "tfp/combmap.hpp"
#include "tfp/moments.hpp"
#include "tfp/poset.hpp"

namespace tfp {

// ------------------------------------------------------------ cumulants

// kappa values keyed by canonical form; any closed even-degree map, connected or not.
class CumulantTable {
 public:
  void set(const ColoredMap& m, const Rational& kappa);
  std::optional<Rational> find(const ColoredMap& m) const;
  Rational at(const ColoredMap& m) const;  // throws MissingMoment
  std::size_t size() const { return table_.size(); }
  const std::map<std::string, std::pair<ColoredMap, Rational>>& entries() const { return table_; }

 private:
  std::map<std::string, std::pair<ColoredMap, Rational>> table_;
};

// Elements n of [minimal(m), m] as colored maps with mu(n, m).
struct IntervalTerm {
  ColoredMap map;
  long long mu = 0;
};
std::vector<IntervalTerm> cumulant_interval(const ColoredMap& m);

// kappa_m = sum_{n <= m} mu(n, m) dist(n). Even vertex degrees only.
Rational cumulant_transform(const AbstractDistribution& dist, const ColoredMap& m);
// kappa of every element of the intervals below the given maps.
CumulantTable cumulant_table(const AbstractDistribution& dist, const std::vector<ColoredMap>& maps);
// m = sum_{n <= m} kappa_n.
Rational moments_from_cumulants(const CumulantTable& kappa, const ColoredMap& m);

// Colors with their degrees; maps use at most max_vertices vertices and max_half_edges legs.
struct MapBudget {
  std::map<std::string, int> orders;
  int max_vertices = 4;
  int max_half_edges = 12;
  std::size_t max_maps = 200000;
};
// Connected closed maps within the budget, optionally restricted to non-monochromatic ones.
std::vector<ColoredMap> budget_maps(const MapBudget& budget, const HatConfig& cfg, bool non_monochromatic_only);

HatConfig hat_config(const AbstractDistribution& dist);

struct CumulantVerdict {
  bool free = true;
  double max_abs = 0;
  std::vector<ColoredMap> witnesses;  // maps with |kappa| > tolerance
  std::size_t checked = 0;
};
// kappa_m = 0 on every connected non-monochromatic map of the budget. Families are read
// from dist; tolerance 0 asks for exact zeros.
CumulantVerdict is_free_cumulant_test(const AbstractDistribution& dist, const MapBudget& budget,
                                      double tolerance = 0);

// ------------------------------------------------------------ free products

struct Marginal {
  std::set<std::string> colors;
  AbstractDistribution dist;
};

// centering: m = -sum_{R nonempty} prod_{j in R} (-m_j) m[blocks of R set to 1] over the
//   blocks of a hat map whose blocks are connected in m (the fully centered term vanishes).
// cumulants: sum over [m0, m] of products of monochromatic cumulants (even degrees only).
// centering_any_hat: the centering step over any hat map; its value depends on the hat
//   once a block is not connected in m.
// A non-monochromatic map without any hat map evaluates to 0.
enum class FreeProductMethod { centering, cumulants, centering_any_hat };

// Hat maps of cm each of whose blocks spans a connected piece of cm.
std::vector<CombMap> admissible_hats(const ColoredMap& cm, const HatConfig& cfg);

// Joint distribution of free families given their individual distributions. Family i is
// labeled "F<i>". hat_choice selects which admissible hat drives each centering step.
AbstractDistribution free_product(const std::vector<Marginal>& marginals,
                                  FreeProductMethod method = FreeProductMethod::centering,
                                  std::size_t hat_choice = 0);

// ------------------------------------------------------------ freeness statistic

struct FreenessOptions {
  double z = 4;        // a monochromatic component is centered if |value| <= z * stderr
  double tol = 1e-10;  // or |value| <= tol
};
struct FreenessReport {
  double statistic = 0;
  // maps freeness forces to 0 (no hat, or a mixed or centered block in every hat), with |value|
  std::vector<std::pair<ColoredMap, double>> forced;
  std::size_t examined = 0;
};

// Connected components of the hat maps of the given maps, deduplicated.
std::vector<ColoredMap> hat_support(const std::vector<ColoredMap>& maps, const HatConfig& cfg);
FreenessReport freeness_statistic(const AbstractDistribution& empirical, const HatConfig& cfg,
                                  const std::vector<ColoredMap>& budget, const FreenessOptions& opt = {});

// ------------------------------------------------------------ free CLT

// Moment of s_n = n^{-1/2} (a_1 + ... + a_n) for free copies of `a` (color `color`),
// reassembled from kappa_m(s_n) = n^{1 - v/2} kappa_m(a).
Rational clt_cumulant(const AbstractDistribution& a, int n, const ColoredMap& connected);
Rational clt(const AbstractDistribution& a, int n, const ColoredMap& m);
// Limit: melon cumulants t^sigma (keyed by sigma, 0-based images), every other cumulant 0.
Rational clt_limit(const std::map<std::vector<int>, Rational>& melon_moments, const ColoredMap& m);
// sigma of a two-vertex map whose edges all join the two vertices; empty if m is not such a melon.
std::vector<int> melon_sigma(const CombMap& m);

// ------------------------------------------------------------ empirical

// Monte Carlo means and stderr of connected maps under a random model.
AbstractDistribution empirical_distribution(const Model& model, const std::vector<ColoredMap>& maps, int N,
                                            std::uint64_t samples, std::uint64_t seed);

// ------------------------------------------------------------ freeness setups

// matrix_goe: D = diag(+1, -1, +1, ...) against a GOE matrix W (order 2).
// diagonal_rotated: the order-3 delta tensor d against e = d . U^3 with U Haar; sampled
//   through the hypermap expansion, so only U is drawn.
enum class FreenessSetup { matrix_goe, diagonal_rotated };
FreenessSetup parse_freeness_setup(const std::string& s);
std::string freeness_setup_name(FreenessSetup s);

struct FreenessRun {
  int N = 0;
  std::size_t budget = 0;  // connected maps with at most max_vertices vertices
  AbstractDistribution empirical;
  FreenessReport report;
};
FreenessRun run_freeness_setup(FreenessSetup setup, int N, std::uint64_t samples, std::uint64_t seed,
                               int max_vertices = 4, const FreenessOptions& opt = {});

}  // namespace tfp
