#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tfp/combmap.hpp"

namespace tfp {

struct SwitchResult {
  CombMap map;
  int delta_gamma = 0;  // gamma(result) - gamma(m)
};

// All maps (pi, alpha') with alpha' alpha a product of two disjoint transpositions.
std::vector<SwitchResult> covering_switches(const CombMap& m);

// Order structure of M_pi with memoized lower covers and intervals. Keys are the
// alpha images: all maps handled by one view share pi. Reads and inserts are
// serialized by an internal mutex.
class SwitchPosetView {
 public:
  explicit SwitchPosetView(std::vector<int> pi);
  const std::vector<int>& pi() const { return pi_; }

  // maps one disconnecting switch below
  const std::vector<std::vector<int>>& lower_covers(const std::vector<int>& alpha);
  bool leq(const std::vector<int>& a, const std::vector<int>& b);

  struct Interval {
    std::vector<std::vector<int>> elements;  // element 0 is the top
    std::vector<int> gamma;
    std::vector<std::vector<int>> above;     // strict upper set of each element, as indices
    std::vector<long long> mu_top;           // mu(element, top)
    int bottom = -1;
  };
  const Interval& interval(const std::vector<int>& bottom, const std::vector<int>& top);

  CombMap make(const std::vector<int>& alpha) const { return CombMap(pi_, alpha); }

 private:
  std::vector<int> pi_;
  std::mutex mu_;
  std::map<std::vector<int>, std::vector<std::vector<int>>> covers_;
  std::map<std::pair<std::vector<int>, std::vector<int>>, std::shared_ptr<Interval>> intervals_;
};

bool leq(const CombMap& m1, const CombMap& m2);

// Unique minimal map below an even-degree map.
CombMap minimal_map(const CombMap& m);

std::vector<CombMap> interval(const CombMap& m0, const CombMap& m);
long long moebius(const CombMap& m0, const CombMap& m);

struct MeetJoin {
  CombMap meet, join;
};
MeetJoin lattice_meet_join(const CombMap& m1, const CombMap& m2, const CombMap& ambient);

bool is_melonic(const CombMap& m);

struct CensusResult {
  int p = 0, k = 0;
  long long enumerated = 0;       // identity-melon decompositions / (2k-1)!
  long long labeled_melonic = 0;  // connected melonic leg-preserving maps on fixed pi
  long long fuss_catalan = 0;
};
long long fuss_catalan(int p, int k);
CensusResult melonic_census(int p, int k);

// Colors map to family labels; colors absent from the table are their own family.
// The identity color belongs to every family.
struct HatConfig {
  std::map<std::string, std::string> family_of;
  std::string identity_color = "1";

  bool is_identity(const std::string& c) const { return c == identity_color; }
  std::string family(const std::string& c) const;
};

bool is_monochromatic(const ColoredMap& cm, const std::vector<int>& vertices, const HatConfig& cfg);
bool satisfies_p1(const ColoredMap& cm, const HatConfig& cfg);
bool is_chromatic_switch(const ColoredMap& cm, int e1, int e2, const HatConfig& cfg);
std::vector<CombMap> hat_maps(const ColoredMap& cm, const HatConfig& cfg);

}  // namespace tfp
