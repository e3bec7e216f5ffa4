#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tfp {

struct MapError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Permutation on {0..m-1}; the public cycle notation is 1-based.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> images);
  static Permutation identity(int m);
  static Permutation from_cycles(int m, const std::vector<std::vector<int>>& cycles);

  int size() const { return static_cast<int>(img_.size()); }
  int operator()(int i) const { return img_[i]; }
  const std::vector<int>& images() const { return img_; }
  std::vector<int> images_1based() const;

  // Cycles with 1-based entries, each starting at its minimum, sorted by minimum.
  std::vector<std::vector<int>> cycles(bool with_fixed_points = true) const;
  Permutation inverse() const;
  // (a*b)(i) = a(b(i))
  friend Permutation operator*(const Permutation& a, const Permutation& b);
  bool is_involution() const;
  bool operator==(const Permutation& o) const { return img_ == o.img_; }
  bool operator!=(const Permutation& o) const { return img_ != o.img_; }

 private:
  std::vector<int> img_;
};

enum class MapKind { map, hypermap };

class CombMap {
 public:
  CombMap() = default;
  // 0-based images; validates the invariants of the given kind.
  CombMap(std::vector<int> pi, std::vector<int> alpha, MapKind kind = MapKind::map);

  int size() const { return static_cast<int>(pi_.size()); }
  const std::vector<int>& pi() const { return pi_; }
  const std::vector<int>& alpha() const { return alpha_; }
  MapKind kind() const { return kind_; }

  int num_vertices() const { return static_cast<int>(verts_.size()); }
  const std::vector<int>& legs(int v) const { return verts_[v]; }
  int degree(int v) const { return static_cast<int>(verts_[v].size()); }
  int vertex_of(int e) const { return vertex_of_[e]; }
  int leg_index(int e) const { return leg_of_[e]; }
  // alpha fixed points in increasing label order
  const std::vector<int>& boundaries() const { return bnd_; }
  bool closed() const { return bnd_.empty(); }

  bool operator==(const CombMap& o) const {
    return kind_ == o.kind_ && pi_ == o.pi_ && alpha_ == o.alpha_;
  }
  bool operator!=(const CombMap& o) const { return !(*this == o); }

 private:
  std::vector<int> pi_, alpha_;
  MapKind kind_ = MapKind::map;
  std::vector<std::vector<int>> verts_;
  std::vector<int> vertex_of_, leg_of_, bnd_;
};

struct ColoredMap {
  CombMap map;
  std::vector<std::string> colors;  // one per vertex; empty means uncolored

  ColoredMap() = default;
  ColoredMap(CombMap m, std::vector<std::string> c = {});
  const std::string& color(int v) const;
  bool uncolored() const { return colors.empty(); }
  bool operator==(const ColoredMap& o) const { return map == o.map && colors == o.colors; }
  bool operator!=(const ColoredMap& o) const { return !(*this == o); }
};

// 1-based cycles. Elements absent from alpha_cycles are fixed points.
CombMap build_map(const std::vector<std::vector<int>>& pi_cycles,
                  const std::vector<std::vector<int>>& alpha_cycles,
                  MapKind kind = MapKind::map);

enum class Family { star, bouquet, melon };
// sigma: 0-based images in S_{p/2} for bouquets, S_p for melons; empty means identity.
CombMap canonical_family(Family kind, int p, const std::vector<int>& sigma = {});
CombMap star(int q);
CombMap bouquet(int p, const std::vector<int>& sigma = {});
CombMap melon(int p, const std::vector<int>& sigma = {});

struct Components {
  std::vector<int> of_vertex;  // component id, numbered by least vertex
  int gamma = 0;
};
Components components(const CombMap& m);
bool is_connected(const CombMap& m);

CombMap disjoint_union(const CombMap& a, const CombMap& b);
ColoredMap disjoint_union(const ColoredMap& a, const ColoredMap& b);

// Sub-map on a vertex subset, labels renormalized preserving order. Edges leaving
// the subset become boundaries.
ColoredMap restrict_to(const ColoredMap& cm, const std::vector<int>& vertices);
// Connected components, each relabeled preserving order, in order of least vertex.
std::vector<ColoredMap> split_components(const ColoredMap& cm);

// Apply sigma (0-based) to the labels: returns (sigma pi sigma^-1, sigma alpha sigma^-1).
// Throws if the result would not preserve leg order or boundary order.
ColoredMap relabel(const ColoredMap& cm, const std::vector<int>& sigma);

struct CanonicalForm {
  ColoredMap map;
  std::string key;
  std::uint64_t hash = 0;
};
CanonicalForm canonical_form(const ColoredMap& cm);
CanonicalForm canonical_form(const CombMap& m);
std::string canonical_key(const ColoredMap& cm);

CombMap compose(const CombMap& m, const std::vector<CombMap>& parts);
ColoredMap compose(const ColoredMap& m, const std::vector<ColoredMap>& parts);

// Surgery. Boundaries are referred to by their slot (0-based rank).
ColoredMap surgery_close(const ColoredMap& cm);
ColoredMap surgery_extend(const ColoredMap& cm, const std::string& color, int p);
// alpha(legs of v) become boundary slots 0..p-1 (slot sigma(k) for leg k when given);
// remaining boundaries follow in their previous order.
ColoredMap surgery_remove(const ColoredMap& cm, int v, const std::vector<int>& sigma = {});
// Slot k of the result holds boundary sigma(k) of cm.
ColoredMap surgery_permute(const ColoredMap& cm, const std::vector<int>& sigma);

// Removal of a vertex u of even degree carrying the identity 1_p: alpha(leg 2j) is
// wired to alpha(leg 2j+1). Defined in wiring.hpp terms: returns the map and the
// number of index loops closed without any surviving leg.
struct WiringResult;
WiringResult remove_identity_vertex(const ColoredMap& cm, int u);

// Text codec: "MAPv1 | pi: (..) | alpha: (..) | colors: a b".
std::string to_text(const ColoredMap& cm);
std::string to_text(const CombMap& m);
ColoredMap parse_map(const std::string& text, int line = 1);
std::vector<ColoredMap> parse_map_file(const std::string& contents);

struct ParseError : MapError {
  int line, column;
  ParseError(const std::string& msg, int l, int c);
};

// All closed connected maps (up to equivalence) whose vertices carry the given colors
// with the given degrees, in canonical order.
std::vector<ColoredMap> enumerate_closed_maps(const std::vector<std::string>& colors,
                                              const std::vector<int>& degrees,
                                              bool connected_only = true);

}  // namespace tfp
