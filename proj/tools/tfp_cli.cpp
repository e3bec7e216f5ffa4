// tfp: enumeration, evaluation, sampling and verification experiments.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tfp/distribution.hpp"
#include "tfp/moments.hpp"
#include "tfp/poset.hpp"

#ifndef TFP_BUILD_ID
#define TFP_BUILD_ID "unknown"
#endif

using namespace tfp;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kToleranceFail = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------ report

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<ojson>> rows;
  ojson summary = ojson::object();
  int status = kPass;

  void add(std::vector<ojson> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match the header");
    rows.push_back(std::move(row));
  }
};

std::string csv_cell(const ojson& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string to_csv(const Report& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
  os << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ------------------------------------------------------------ options

struct Common {
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 1;
  bool no_timestamp = false;
  int workers = 1;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out, "Report file (default: stdout)");
  sub->add_option("--seed", c.seed, "Root seed");
  sub->add_flag("--no-timestamp", c.no_timestamp, "Omit the timestamp from JSON provenance");
  sub->add_option("--workers", c.workers, "Accepted for compatibility; sampling is sequential")
      ->check(CLI::PositiveNumber);
  sub->add_option("--config", c.config, "Flat key=value file; command-line flags win");
}

ojson config_echo(const CLI::App* sub) {
  ojson cfg = ojson::object();
  std::vector<std::pair<std::string, std::string>> items;
  for (const CLI::Option* opt : sub->get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty()) continue;
    const std::string& key = names.front();
    if (key == "help" || key == "workers" || key == "config" || key == "out") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
      if (opt->get_expected_min() == 0) value = "true";
    } else {
      value = opt->get_default_str();
      if (opt->get_expected_min() == 0 && value.empty()) value = "false";
    }
    items.emplace_back(key, value);
  }
  std::sort(items.begin(), items.end());
  for (auto& [k, v] : items) cfg[k] = v;
  return cfg;
}

void emit(const Report& r, const std::string& command, const Common& c, const CLI::App* sub) {
  std::string text;
  if (c.format == "csv") {
    text = to_csv(r);
  } else {
    ojson j;
    j["command"] = command;
    j["columns"] = r.columns;
    ojson rows = ojson::array();
    for (const auto& row : r.rows) {
      ojson o = ojson::object();
      for (std::size_t i = 0; i < row.size(); ++i) o[r.columns[i]] = row[i];
      rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    j["summary"] = r.summary;
    j["status"] = r.status == kPass ? "pass" : "tolerance_fail";
    ojson prov;
    prov["tool"] = "tfp";
    prov["build_id"] = TFP_BUILD_ID;
    prov["seed"] = c.seed;
    prov["config"] = config_echo(sub);
    if (!c.no_timestamp) prov["timestamp"] = utc_now();
    j["provenance"] = std::move(prov);
    text = j.dump(2) + "\n";
  }
  if (c.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write report " + c.out);
    f << text;
  }
}

// Flat key=value config: keys are long option names of the subcommand.
std::vector<std::string> merge_config(CLI::App* sub, std::vector<std::string> args, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config file " + path);
  auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key == "config") throw UsageError(path + ":" + std::to_string(lineno) + ": nested config files are not supported");
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for " + sub->get_name());
    if (given(key)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") args.push_back("--" + key);
      else if (!(value == "false" || value == "0" || value == "no"))
        throw UsageError(path + ":" + std::to_string(lineno) + ": flag '" + key + "' takes true or false");
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

// ------------------------------------------------------------ inputs

std::vector<ColoredMap> read_maps(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open map file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  auto maps = parse_map_file(ss.str());
  if (maps.empty()) throw std::runtime_error("map file " + path + " holds no map");
  return maps;
}

std::pair<std::string, std::string> split_binding(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos) return {"", s};
  return {s.substr(0, eq), s.substr(eq + 1)};
}

void check_grid(const std::vector<int>& grid) {
  if (grid.empty()) throw UsageError("--n-dim needs at least one value");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1) throw UsageError("--n-dim values must be positive");
    if (i && grid[i] <= grid[i - 1]) throw UsageError("--n-dim grid must be strictly increasing");
  }
}

std::set<std::string> colors_of(const std::vector<ColoredMap>& maps) {
  std::set<std::string> out;
  for (const auto& m : maps)
    for (int v = 0; v < m.map.num_vertices(); ++v) out.insert(m.color(v));
  return out;
}

// ------------------------------------------------------------ commands

struct CensusArgs {
  int p = 2;
  std::vector<int> k{1};
};

Report run_census(const CensusArgs& a) {
  Report r;
  r.columns = {"p", "k", "enumerated", "fuss_catalan"};
  for (int k : a.k) {
    auto c = melonic_census(a.p, k);
    r.add({c.p, c.k, c.enumerated, c.fuss_catalan});
    if (c.enumerated != c.fuss_catalan) r.status = kToleranceFail;
  }
  return r;
}

struct EnumerateArgs {
  std::vector<std::string> colors;
  std::vector<int> degrees;
  bool disconnected = false;
};

Report run_enumerate(const EnumerateArgs& a) {
  std::vector<int> deg = a.degrees;
  if (deg.size() == 1) deg.assign(a.colors.size(), deg[0]);
  if (deg.size() != a.colors.size()) throw UsageError("--degrees takes one value or one per color");
  Report r;
  r.columns = {"index", "map", "vertices", "components", "melonic"};
  auto maps = enumerate_closed_maps(a.colors, deg, !a.disconnected);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& m = maps[i];
    r.add({i, to_text(m), m.map.num_vertices(), components(m.map).gamma, is_melonic(m.map)});
  }
  r.summary["maps"] = maps.size();
  return r;
}

struct EvalArgs {
  std::string map;
  std::vector<std::string> tensors, families;
  int n_dim = 0;
  bool oracle = false;
  double tol = 1e-12;
};

Report run_eval(const EvalArgs& a) {
  auto maps = read_maps(a.map);
  std::map<std::string, DenseTensor> bound;
  const auto colors = colors_of(maps);
  auto bind = [&](const std::string& color, const DenseTensor& t) {
    if (color.empty()) {
      for (const auto& c : colors) bound[c] = t;
    } else {
      bound[color] = t;
    }
  };
  for (const auto& s : a.tensors) {
    auto [color, path] = split_binding(s);
    bind(color, load_tensor(path));
  }
  for (const auto& s : a.families) {
    auto [color, kind] = split_binding(s);
    if (a.n_dim < 1) throw UsageError("--family needs --n-dim");
    int p = -1;
    for (const auto& m : maps)
      for (int v = 0; v < m.map.num_vertices(); ++v)
        if (color.empty() || m.color(v) == color) p = m.map.degree(v);
    if (p < 0) throw UsageError("no vertex of color '" + color + "' in " + a.map);
    bind(color, make_deterministic_family(parse_family(kind), p, a.n_dim));
  }
  for (const auto& [c, t] : bound)
    if (a.n_dim > 0 && t.dim() != a.n_dim)
      throw UsageError("tensor for color '" + c + "' has dimension " + std::to_string(t.dim()) + ", expected " +
                       std::to_string(a.n_dim));
  Report r;
  r.columns = {"map", "N", "value"};
  if (a.oracle) r.columns.insert(r.columns.end(), {"naive", "rel_diff"});
  double worst = 0;
  for (const auto& m : maps) {
    if (!m.map.closed()) throw UsageError("eval reports closed maps only: " + to_text(m));
    auto x = bind_colors(m, bound);
    const int N = x.empty() ? std::max(a.n_dim, 1) : x[0]->dim();
    double v = eval_closed(m, x);
    std::vector<ojson> row{to_text(m), N, v};
    if (a.oracle) {
      double naive = naive_eval(m, x).value();
      double rel = std::abs(v - naive) / std::max(1.0, std::abs(naive));
      worst = std::max(worst, rel);
      row.push_back(naive);
      row.push_back(rel);
      if (rel > a.tol) r.status = kToleranceFail;
    }
    r.add(std::move(row));
  }
  if (a.oracle) r.summary["max_rel_diff"] = worst;
  return r;
}

struct SampleArgs {
  std::string map;
  std::string law = "gaussian", norm = "paper";
  std::vector<std::string> fixed, rotate;
  std::string haar;
  std::vector<int> n_dim{8};
  std::uint64_t samples = 1000;
  std::vector<double> expect;
  double z = 4;
};

Model build_model(const SampleArgs& a, const std::vector<ColoredMap>& maps, int N) {
  Model model;
  model.norm = parse_norm(a.norm);
  auto orders = color_orders(maps);
  std::set<std::string> taken;
  if (!a.haar.empty()) {
    model.haar_color = a.haar;
    taken.insert(a.haar);
  }
  for (const auto& s : a.fixed) {
    auto [color, kind] = split_binding(s);
    if (color.empty()) throw UsageError("--fixed takes color=family");
    auto it = orders.find(color);
    if (it == orders.end()) throw UsageError("--fixed color '" + color + "' does not occur in the maps");
    model.fixed[color] = make_deterministic_family(parse_family(kind), it->second, N);
    taken.insert(color);
  }
  for (const auto& c : a.rotate) {
    if (!model.fixed.count(c)) throw UsageError("--rotate color '" + c + "' needs a --fixed family");
    model.rotated.insert(c);
    if (!model.haar_color) model.haar_color = "u";
  }
  for (const auto& [c, p] : orders)
    if (!taken.count(c)) model.wigner[c] = parse_law(a.law);
  return model;
}

Report run_sample(const SampleArgs& a, std::uint64_t seed) {
  check_grid(a.n_dim);
  if (a.samples < 1) throw UsageError("--samples must be at least 1");
  auto maps = read_maps(a.map);
  if (!a.expect.empty() && a.expect.size() != maps.size())
    throw UsageError("--expect takes one value per map");
  Report r;
  r.columns = {"map", "N", "value", "stderr", "samples", "seed"};
  if (!a.expect.empty()) r.columns.insert(r.columns.end(), {"expected", "z_score"});
  for (int N : a.n_dim) {
    auto est = monte_carlo_moments(maps, build_model(a, maps, N), N, a.samples, seed);
    for (std::size_t i = 0; i < maps.size(); ++i) {
      std::vector<ojson> row{to_text(maps[i]), N, est[i].value, est[i].stderr, est[i].samples, seed};
      if (!a.expect.empty()) {
        double d = std::abs(est[i].value - a.expect[i]);
        double zs = est[i].stderr > 0 ? d / est[i].stderr : (d > 1e-12 ? INFINITY : 0.0);
        row.push_back(a.expect[i]);
        row.push_back(std::isfinite(zs) ? ojson(zs) : ojson("inf"));
        if (!(zs <= a.z)) r.status = kToleranceFail;
      }
      r.add(std::move(row));
    }
  }
  return r;
}

struct SdArgs {
  std::string kind = "haar", map, law = "gaussian";
  int n_dim = 16;
  std::uint64_t samples = 100000;
  double z = 4;
};

Report run_sd(const SdArgs& a, std::uint64_t seed) {
  if (a.samples < 2) throw UsageError("--samples must be at least 2");
  if (a.n_dim < 1) throw UsageError("--n-dim must be positive");
  SdKind kind;
  if (a.kind == "haar") kind = SdKind::haar;
  else if (a.kind == "gaussian") kind = SdKind::gaussian;
  else throw UsageError("--kind is haar or gaussian");
  auto maps = a.map.empty() ? sd_test_maps(kind) : read_maps(a.map);
  const int N = a.n_dim;
  Report r;
  r.columns = {"map", "N", "residual", "stderr", "ratio", "samples"};
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& m = maps[i];
    MomentEstimate res;
    if (kind == SdKind::haar) {
      Model model;
      model.haar_color = "u";
      auto colors = colors_of({m});
      colors.erase("u");
      model.fixed = sd_fixed_matrices(colors, N, seed);
      res = sd_residual(kind, m, model, N, a.samples, seed);
    } else {
      // sampled moment against the exact finite-N Gaussian recursion
      Model model;
      for (const auto& c : colors_of({m})) model.wigner[c] = parse_law(a.law);
      auto mc = monte_carlo_moment(m, model, N, a.samples, seed);
      res = mc;
      res.value = mc.value - gaussian_sd_expand(m, N, colors_of({m}));
    }
    double ratio = res.stderr > 0 ? std::abs(res.value) / res.stderr : (std::abs(res.value) > 1e-12 ? INFINITY : 0.0);
    r.add({to_text(m), N, res.value, res.stderr, std::isfinite(ratio) ? ojson(ratio) : ojson("inf"), res.samples});
    if (!(ratio <= a.z)) r.status = kToleranceFail;
  }
  return r;
}

struct FreenessArgs {
  std::string setup = "matrix-goe";
  std::vector<int> n_dim{8, 16, 32};
  std::uint64_t samples = 10000;
  int max_vertices = 4;
  double threshold = 0.1, z = 4;
};

Report run_freeness(const FreenessArgs& a, std::uint64_t seed) {
  check_grid(a.n_dim);
  if (a.samples < 2) throw UsageError("--samples must be at least 2");
  auto setup = parse_freeness_setup(a.setup);
  Report r;
  r.columns = {"setup", "N", "budget", "forced", "statistic", "worst_map"};
  double prev = INFINITY, last = 0;
  bool decreasing = true;
  for (int N : a.n_dim) {
    FreenessOptions opt;
    opt.z = a.z;
    auto run = run_freeness_setup(setup, N, a.samples, seed, a.max_vertices, opt);
    std::string worst;
    for (const auto& [m, v] : run.report.forced)
      if (v == run.report.statistic) {
        worst = to_text(m);
        break;
      }
    r.add({a.setup, N, run.budget, run.report.forced.size(), run.report.statistic, worst});
    decreasing = decreasing && run.report.statistic < prev;
    prev = last = run.report.statistic;
  }
  r.summary["decreasing"] = decreasing;
  r.summary["final"] = last;
  if (!decreasing || last >= a.threshold) r.status = kToleranceFail;
  return r;
}

struct CumulantArgs {
  std::string dist, map;
  std::vector<std::string> families;
  bool check_free = false;
  int max_vertices = 4, max_half_edges = 12;
};

Report run_cumulants(const CumulantArgs& a) {
  std::ifstream f(a.dist);
  if (!f) throw std::runtime_error("cannot open distribution file " + a.dist);
  std::stringstream ss;
  ss << f.rdbuf();
  auto dist = AbstractDistribution::from_json(ss.str());
  for (const auto& s : a.families) {
    auto [color, label] = split_binding(s);
    if (color.empty()) throw UsageError("--family takes color=label");
    dist.set_family(color, label);
  }
  Report r;
  if (a.check_free) {
    std::vector<ColoredMap> stored;
    for (const auto& e : dist.entries()) stored.push_back(e.map);
    MapBudget budget{color_orders(stored), a.max_vertices, a.max_half_edges};
    auto verdict = is_free_cumulant_test(dist, budget);
    r.columns = {"map", "kappa"};
    for (const auto& w : verdict.witnesses) r.add({to_text(w), rational_to_string(cumulant_transform(dist, w))});
    r.summary["checked"] = verdict.checked;
    r.summary["max_abs"] = verdict.max_abs;
    r.summary["free"] = verdict.free;
    if (!verdict.free) r.status = kToleranceFail;
    return r;
  }
  if (a.map.empty()) throw UsageError("cumulants needs --map or --check-free");
  r.columns = {"map", "moment", "kappa", "kappa_value"};
  for (const auto& m : read_maps(a.map)) {
    auto k = cumulant_transform(dist, m);
    r.add({to_text(m), rational_to_string(dist.at(m)), rational_to_string(k), k.convert_to<double>()});
  }
  return r;
}

struct LimitArgs {
  std::string map, norm = "paper";
  std::vector<std::string> gaussian;
};

Report run_limit(const LimitArgs& a) {
  auto maps = read_maps(a.map);
  Report r;
  r.columns = {"map", "limit", "limit_value"};
  for (const auto& m : maps) {
    auto g = a.gaussian.empty() ? colors_of({m}) : std::set<std::string>(a.gaussian.begin(), a.gaussian.end());
    auto est = limit_moment_gaussian(m, g, {}, parse_norm(a.norm));
    r.add({to_text(m), est.exact ? ojson(rational_to_string(*est.exact)) : ojson(nullptr), est.value});
  }
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tfp: tensor free probability experiments"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Common common;

  CensusArgs census;
  auto* c_census = app.add_subcommand("census", "Melonic census against Fuss-Catalan numbers");
  c_census->add_option("--p", census.p, "Tensor order")->check(CLI::Range(2, 8));
  c_census->add_option("--k", census.k, "Half the number of vertices (list)")->delimiter(',')->check(CLI::Range(1, 6));

  EnumerateArgs en;
  auto* c_enum = app.add_subcommand("enumerate-maps", "Closed maps on the given colored vertices, as MAPv1 lines");
  c_enum->add_option("--colors", en.colors, "Vertex colors")->delimiter(',')->required();
  c_enum->add_option("--degrees", en.degrees, "Vertex degrees (one value or one per color)")
      ->delimiter(',')
      ->required();
  c_enum->add_flag("--disconnected", en.disconnected, "Include disconnected maps");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate closed maps on tensors");
  c_eval->add_option("--map", ev.map, "MAPv1/HMAPv1 file")->required();
  c_eval->add_option("--tensor", ev.tensors, "[color=]path of a tensor file (binary or .csv)");
  c_eval->add_option("--family", ev.families, "[color=]identity|diagonal|rank_one");
  c_eval->add_option("--n-dim", ev.n_dim, "Dimension N (checked against tensor files)");
  c_eval->add_flag("--oracle", ev.oracle, "Compare with full index summation");
  c_eval->add_option("--tol", ev.tol, "Relative tolerance for --oracle");

  SampleArgs sm;
  auto* c_sample = app.add_subcommand("sample-moments", "Monte Carlo moments, one row per (map, N)");
  c_sample->add_option("--map", sm.map, "MAPv1/HMAPv1 file")->required();
  c_sample->add_option("--law", sm.law, "Entry law of random colors")
      ->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
  c_sample->add_option("--norm", sm.norm, "Variance profile")->check(CLI::IsMember({"paper", "unit_melon"}));
  c_sample->add_option("--fixed", sm.fixed, "color=identity|diagonal|rank_one");
  c_sample->add_option("--rotate", sm.rotate, "Fixed color conjugated by a Haar matrix");
  c_sample->add_option("--haar", sm.haar, "Color drawn as a Haar orthogonal matrix");
  c_sample->add_option("--n-dim", sm.n_dim, "N grid, strictly increasing")->delimiter(',');
  c_sample->add_option("--samples", sm.samples, "Samples per N");
  c_sample->add_option("--expect", sm.expect, "Expected value per map")->delimiter(',');
  c_sample->add_option("--z", sm.z, "Allowed distance from --expect in standard errors");

  SdArgs sd;
  auto* c_sd = app.add_subcommand("sd-check", "Schwinger-Dyson residuals");
  c_sd->add_option("--kind", sd.kind, "haar or gaussian")->check(CLI::IsMember({"haar", "gaussian"}));
  c_sd->add_option("--map", sd.map, "MAPv1 file (default: three built-in maps)");
  c_sd->add_option("--law", sd.law, "Entry law for --kind gaussian")
      ->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
  c_sd->add_option("--n-dim", sd.n_dim, "Dimension N");
  c_sd->add_option("--samples", sd.samples, "Samples");
  c_sd->add_option("--z", sd.z, "Allowed |residual| in standard errors");

  FreenessArgs fr;
  auto* c_free = app.add_subcommand("freeness-check", "Freeness statistic over an N grid");
  c_free->add_option("--setup", fr.setup, "matrix-goe or diagonal-rotated")
      ->check(CLI::IsMember({"matrix-goe", "diagonal-rotated"}));
  c_free->add_option("--n-dim", fr.n_dim, "N grid, strictly increasing")->delimiter(',');
  c_free->add_option("--samples", fr.samples, "Samples per N");
  c_free->add_option("--max-vertices", fr.max_vertices, "Budget: vertices per map")->check(CLI::Range(2, 4));
  c_free->add_option("--threshold", fr.threshold, "Required statistic at the largest N");
  c_free->add_option("--z", fr.z, "Centering test in standard errors");

  CumulantArgs cu;
  auto* c_cum = app.add_subcommand("cumulants", "Free cumulants of a distribution dump");
  c_cum->add_option("--dist", cu.dist, "JSON distribution dump")->required();
  c_cum->add_option("--map", cu.map, "MAPv1 file of query maps");
  c_cum->add_option("--family", cu.families, "color=label");
  c_cum->add_flag("--check-free", cu.check_free, "Vanishing of mixed cumulants on the budget");
  c_cum->add_option("--max-vertices", cu.max_vertices, "Budget: vertices per map");
  c_cum->add_option("--max-half-edges", cu.max_half_edges, "Budget: half-edges per map")->check(CLI::Range(2, 16));

  LimitArgs li;
  auto* c_limit = app.add_subcommand("limit", "Large-N Gaussian limits");
  c_limit->add_option("--map", li.map, "MAPv1 file")->required();
  c_limit->add_option("--gaussian", li.gaussian, "Gaussian colors (default: all)")->delimiter(',');
  c_limit->add_option("--norm", li.norm, "Variance profile")->check(CLI::IsMember({"paper", "unit_melon"}));

  for (auto* sub : {c_census, c_enum, c_eval, c_sample, c_sd, c_free, c_cum, c_limit}) add_common(sub, common);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty()) {
      std::string path;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      }
      CLI::App* sub = app.get_subcommand_no_throw(args[0]);
      if (!path.empty() && sub) args = merge_config(sub, args, path);
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    Report r;
    if (sub == c_census) r = run_census(census);
    else if (sub == c_enum) r = run_enumerate(en);
    else if (sub == c_eval) r = run_eval(ev);
    else if (sub == c_sample) r = run_sample(sm, common.seed);
    else if (sub == c_sd) r = run_sd(sd, common.seed);
    else if (sub == c_free) r = run_freeness(fr, common.seed);
    else if (sub == c_cum) r = run_cumulants(cu);
    else r = run_limit(li);
    emit(r, name, common, sub);
    if (r.status != kPass) std::cerr << name << ": tolerance check failed\n";
    return r.status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
