#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tfp/combmap.hpp"

namespace tfp {

using Rational = boost::multiprecision::cpp_rational;

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

constexpr std::size_t kMaxTensorEntries = std::size_t{1} << 21;
constexpr std::size_t kMaxIntermediate = std::size_t{1} << 24;

std::size_t checked_power(int N, int p, std::size_t cap = kMaxTensorEntries);

// Order-p tensor with every dimension N, row-major (last index fastest).
class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(int order, int dim);
  DenseTensor(int order, int dim, std::vector<double> data);
  static DenseTensor scalar(double v);

  int order() const { return p_; }
  int dim() const { return n_; }
  std::size_t size() const { return data_.size(); }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(const std::vector<int>& idx);
  double at(const std::vector<int>& idx) const;
  std::size_t offset(const std::vector<int>& idx) const;
  double value() const;  // order 0 only

 private:
  int p_ = 0, n_ = 1;
  std::vector<double> data_{0.0};
};

DenseTensor operator+(const DenseTensor& a, const DenseTensor& b);
DenseTensor operator*(double s, const DenseTensor& a);
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

// 1_p: product of Kronecker deltas on leg pairs (1,2), (3,4), ...
DenseTensor delta_pairs(int p, int N);
DenseTensor identity_matrix(int N);

// Tensor files. Binary: magic "TNSRv1\0\0", uint32 p, uint32 N, N^p little-endian doubles.
// CSV: header "i1,...,ip,value", 1-based indices, one row per entry.
void write_binary(std::ostream& os, const DenseTensor& t);
DenseTensor read_binary(std::istream& is);
void write_csv(std::ostream& os, const DenseTensor& t);
DenseTensor read_csv(std::istream& is);
DenseTensor load_tensor(const std::string& path);
void save_tensor(const std::string& path, const DenseTensor& t);

// One tensor per vertex, in vertex order.
using VertexTensors = std::vector<const DenseTensor*>;
VertexTensors bind_colors(const ColoredMap& cm, const std::map<std::string, DenseTensor>& by_color);

struct ContractionStep {
  int lhs = 0, rhs = 0;           // operand slots; result replaces lhs, rhs is erased
  std::vector<int> result_labels;
  std::size_t result_size = 0;
  double flops = 0;
};

struct ContractionPlan {
  std::vector<std::vector<int>> operand_labels;  // per vertex, label per leg
  std::vector<int> output_labels;                // boundary labels in slot order
  int num_labels = 0;
  int N = 0;
  std::vector<ContractionStep> steps;
  std::size_t peak_size = 1;
  double flops = 0;
};

// Greedy pairwise order: pairs sharing a label first, smallest result first.
ContractionPlan plan_contraction(const CombMap& m, int N);

// Closed maps: order-0 tensor holding the 1/N^gamma normalized value.
// Open maps: order-q tensor over the boundary slots, unnormalized.
DenseTensor eval_invariant(const ColoredMap& cm, const VertexTensors& x);
DenseTensor eval_invariant(const ColoredMap& cm, const std::map<std::string, DenseTensor>& by_color);
DenseTensor execute_plan(const ContractionPlan& plan, const VertexTensors& x);
double eval_closed(const ColoredMap& cm, const VertexTensors& x);
double eval_closed(const ColoredMap& cm, const std::map<std::string, DenseTensor>& by_color);

// Reference full-index summation.
DenseTensor naive_eval(const ColoredMap& cm, const VertexTensors& x);
// Exact rational version (tensor entries converted exactly).
std::vector<Rational> naive_eval_exact(const ColoredMap& cm, const std::vector<std::vector<Rational>>& x, int N);

// (T . U^p)_j = sum_i T_i prod_k U_{j_k i_k}
DenseTensor orbit_action(const DenseTensor& T, const DenseTensor& U);

struct ProbeRow {
  int map_index = 0;
  int N = 0;
  double abs_value = 0;
};
struct ProbeTable {
  std::vector<ProbeRow> rows;
  std::vector<double> sup;  // per map
};
// family(N) returns the per-color tensors at dimension N.
ProbeTable probe_bounds(const std::function<std::map<std::string, DenseTensor>(int)>& family,
                        const std::vector<ColoredMap>& maps, const std::vector<int>& N_grid);

}  // namespace tfp
