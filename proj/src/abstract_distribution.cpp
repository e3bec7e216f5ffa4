#include "tfp/abstract_distribution.hpp"

#include "json.hpp"

#include "tfp/wiring.hpp"

namespace tfp {

AbstractDistribution::AbstractDistribution(const AbstractDistribution& o)
    : table_(o.table_), families_(o.families_), identity_(o.identity_), rule_(o.rule_) {}

AbstractDistribution& AbstractDistribution::operator=(const AbstractDistribution& o) {
  if (this != &o) {
    table_ = o.table_;
    families_ = o.families_;
    identity_ = o.identity_;
    rule_ = o.rule_;
    std::lock_guard<std::mutex> lock(mu_);
    rule_cache_.clear();
  }
  return *this;
}

void AbstractDistribution::set(const ColoredMap& connected, const Rational& value, double stderr) {
  if (!connected.map.closed()) throw MapError("distributions are defined on closed maps");
  if (!is_connected(connected.map)) throw MapError("only connected maps are stored");
  auto cf = canonical_form(connected);
  table_[cf.key] = Entry{cf.map, value, stderr};
}

void AbstractDistribution::set_rule(Rule rule) {
  rule_ = std::move(rule);
  std::lock_guard<std::mutex> lock(mu_);
  rule_cache_.clear();
}

std::string AbstractDistribution::family(const std::string& color) const {
  auto it = families_.find(color);
  return it == families_.end() ? color : it->second;
}

std::optional<Rational> AbstractDistribution::find_connected(const ColoredMap& c) const {
  if (c.map.num_vertices() == 0) return Rational(1);
  for (int v = 0; v < c.map.num_vertices(); ++v) {
    if (c.color(v) == identity_ && c.map.degree(v) % 2 == 0) {
      auto rw = remove_identity_vertex(c, v);
      return find(rw.map);
    }
  }
  auto cf = canonical_form(c);
  auto it = table_.find(cf.key);
  if (it != table_.end()) return it->second.value;
  if (!rule_) return std::nullopt;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto ct = rule_cache_.find(cf.key);
    if (ct != rule_cache_.end()) return ct->second;
  }
  auto r = rule_(cf.map);
  if (r) {
    std::lock_guard<std::mutex> lock(mu_);
    rule_cache_.emplace(cf.key, *r);
  }
  return r;
}

std::optional<Rational> AbstractDistribution::find(const ColoredMap& m) const {
  if (!m.map.closed()) throw MapError("distributions are defined on closed maps");
  Rational prod = 1;
  for (const auto& c : split_components(m)) {
    auto v = find_connected(c);
    if (!v) return std::nullopt;
    prod *= *v;
  }
  return prod;
}

Rational AbstractDistribution::at(const ColoredMap& m) const {
  auto v = find(m);
  if (!v) throw MissingMoment("no value for map " + to_text(m));
  return *v;
}

double AbstractDistribution::stderr_of(const ColoredMap& connected) const {
  auto it = table_.find(canonical_key(connected));
  return it == table_.end() ? 0.0 : it->second.stderr;
}

std::vector<AbstractDistribution::Entry> AbstractDistribution::entries() const {
  std::vector<Entry> out;
  for (const auto& [k, e] : table_) out.push_back(e);
  return out;
}

std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

Rational rational_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (s.find_first_of(".eE") != std::string::npos) return Rational(std::stod(s));
    return Rational(boost::multiprecision::cpp_int(s));
  }
  return Rational(boost::multiprecision::cpp_int(s.substr(0, slash)),
                  boost::multiprecision::cpp_int(s.substr(slash + 1)));
}

std::string AbstractDistribution::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& [k, e] : table_) {
    nlohmann::ordered_json row;
    row["map"] = k;
    row["value"] = e.value.convert_to<double>();
    row["exact"] = rational_to_string(e.value);
    if (e.stderr > 0) row["stderr"] = e.stderr;
    j.push_back(row);
  }
  return j.dump(2);
}

AbstractDistribution AbstractDistribution::from_json(const std::string& text) {
  AbstractDistribution d;
  auto j = nlohmann::json::parse(text);
  for (const auto& row : j) {
    auto m = parse_map(row.at("map").get<std::string>());
    Rational v = row.contains("exact") ? rational_from_string(row["exact"].get<std::string>())
                                       : Rational(row.at("value").get<double>());
    d.set(m, v, row.value("stderr", 0.0));
  }
  return d;
}

}  // namespace tfp
