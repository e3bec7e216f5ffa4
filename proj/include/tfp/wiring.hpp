#pragma once

#include <string>
#include <vector>

#include "tfp/combmap.hpp"

namespace tfp {

namespace detail {
// Labels are assigned to legs by a topological order: the first leg of each vertex
// precedes its other legs and boundaries appear in rank order; ties broken by priority.
struct ProtoMap {
  std::vector<std::vector<int>> vertices;  // global leg ids in leg order
  std::vector<std::string> colors;         // per vertex, may be empty
  std::vector<long long> priority;         // per global leg id
  std::vector<std::vector<int>> cycles;    // alpha cycles of length >= 2
  std::vector<int> boundaries;             // global leg ids in rank order
  MapKind kind = MapKind::map;
};
ColoredMap assemble(const ProtoMap& proto);

struct DisjointSets {
  explicit DisjointSets(int n = 0);
  int add();
  int find(int x);
  void unite(int a, int b);
  std::vector<int> parent;
};
}  // namespace detail

struct WiringResult {
  ColoredMap map;
  int free_loops = 0;  // classes containing no surviving leg: each is a free index
};

// Index-identification network over the directed edges of a map. Nodes 0..m-1 are
// the directed edges; auxiliary nodes can be added. Dropped vertices lose their legs;
// every class of identified nodes becomes an edge (2 surviving legs), a hyper-edge
// (more, if allowed), a boundary (1 leg plus one open node) or a free loop (none).
class Wiring {
 public:
  explicit Wiring(const ColoredMap& cm);
  int add_node();
  void link(int a, int b);
  void link_alpha(int e);
  void link_all_alpha();
  void drop_vertex(int v);
  // The open nodes mark boundary slots, in rank order.
  void set_open(std::vector<int> nodes) { open_ = std::move(nodes); }
  WiringResult build(bool allow_hyper = false) const;

 private:
  const ColoredMap& cm_;
  mutable detail::DisjointSets ds_;
  std::vector<bool> keep_;
  std::vector<int> open_;
};

}  // namespace tfp
