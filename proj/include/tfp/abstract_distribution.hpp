#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfp/combmap.hpp"
#include "tfp/tensoreval.hpp"

namespace tfp {

struct MissingMoment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Values of a distribution on closed colored maps. Only connected maps are stored;
// a disjoint union evaluates to the product of its components, the empty map to 1.
// Vertices of the identity color are removed symbolically (b_p(1_p) counts as 1).
class AbstractDistribution {
 public:
  using Rule = std::function<std::optional<Rational>(const ColoredMap&)>;

  struct Entry {
    ColoredMap map;
    Rational value;
    double stderr = 0;
  };

  AbstractDistribution() = default;
  AbstractDistribution(const AbstractDistribution& o);
  AbstractDistribution& operator=(const AbstractDistribution& o);

  // Stores the value under the canonical form of a connected closed map.
  void set(const ColoredMap& connected, const Rational& value, double stderr = 0);
  void set(const ColoredMap& connected, double value, double stderr = 0) { set(connected, Rational(value), stderr); }
  // Fallback for connected maps missing from the table.
  void set_rule(Rule rule);

  void set_family(const std::string& color, const std::string& family) { families_[color] = family; }
  std::string family(const std::string& color) const;
  const std::map<std::string, std::string>& families() const { return families_; }
  void set_identity_color(std::string c) { identity_ = std::move(c); }
  const std::string& identity_color() const { return identity_; }

  std::optional<Rational> find(const ColoredMap& m) const;
  Rational at(const ColoredMap& m) const;  // throws MissingMoment
  double value(const ColoredMap& m) const { return at(m).convert_to<double>(); }
  bool has(const ColoredMap& m) const { return find(m).has_value(); }
  double stderr_of(const ColoredMap& connected) const;

  std::vector<Entry> entries() const;  // in canonical key order
  std::size_t size() const { return table_.size(); }

  // JSON list of {map, value, stderr}; values written as decimal strings when inexact.
  std::string to_json() const;
  static AbstractDistribution from_json(const std::string& text);

 private:
  std::optional<Rational> find_connected(const ColoredMap& c) const;

  std::map<std::string, Entry> table_;
  std::map<std::string, std::string> families_;
  std::string identity_ = "1";
  Rule rule_;
  mutable std::map<std::string, Rational> rule_cache_;
  mutable std::mutex mu_;
};

std::string rational_to_string(const Rational& r);
Rational rational_from_string(const std::string& s);

}  // namespace tfp
