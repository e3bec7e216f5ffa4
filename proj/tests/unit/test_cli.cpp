#include <sys/wait.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tfp/randgen.hpp"
#include "tfp/tensoreval.hpp"

using namespace tfp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run tfp_cli(const std::string& args) {
  std::string cmd = std::string(TFP_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch() {
  auto dir = fs::temp_directory_path() / ("tfp_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

const char* kMelon3 = "MAPv1 | pi: (1 2 3)(4 5 6) | alpha: (1 4)(2 5)(3 6) | colors: s s\n";

}  // namespace

TEST_CASE("census rows") {
  auto r = tfp_cli("census --p 2 --k 3");
  CHECK(r.code == 0);
  CHECK(r.out == "p,k,enumerated,fuss_catalan\n2,3,5,5\n");
  auto all = tfp_cli("census --p 2 --k 1,2,3");
  CHECK(all.out == "p,k,enumerated,fuss_catalan\n2,1,1,1\n2,2,2,2\n2,3,5,5\n");
}

TEST_CASE("empty result is a header-only CSV") {
  auto r = tfp_cli("enumerate-maps --colors s --degrees 3");
  CHECK(r.code == 0);
  CHECK(r.out == "index,map,vertices,components,melonic\n");
}

TEST_CASE("eval matches the naive oracle") {
  auto dir = scratch();
  write(dir / "melon3.map", kMelon3);
  DenseTensor t(3, 2);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.25 * static_cast<double>(i) - 0.6;
  save_tensor((dir / "t3.bin").string(), t);
  auto r = tfp_cli("eval --map " + (dir / "melon3.map").string() + " --tensor " + (dir / "t3.bin").string() +
                   " --n-dim 2 --oracle --format json --no-timestamp");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  double expect = 0;
  for (std::size_t i = 0; i < t.size(); ++i) expect += t[i] * t[i];
  expect /= 2;
  CHECK(std::abs(j["rows"][0]["value"].get<double>() - expect) < 1e-12);
  CHECK(j["rows"][0]["naive"].get<double>() == doctest::Approx(expect).epsilon(1e-12));
  // dimension mismatch is a usage error
  CHECK(tfp_cli("eval --map " + (dir / "melon3.map").string() + " --tensor " + (dir / "t3.bin").string() +
                " --n-dim 3")
            .code == 1);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  auto dir = scratch();
  write(dir / "melon3.map", kMelon3);
  const std::string map = " --map " + (dir / "melon3.map").string();
  // the f_3 moment is near 1/2, far from 10
  CHECK(tfp_cli("sample-moments" + map + " --n-dim 3 --samples 200 --expect 10").code == 2);
  CHECK(tfp_cli("sample-moments" + map + " --n-dim 3 --samples 200 --expect 10 --z 1e9").code == 0);
  CHECK(tfp_cli("freeness-check --setup matrix-goe --n-dim 4,6 --samples 50 --max-vertices 2 --threshold 0").code == 2);
  CHECK(tfp_cli("sample-moments --map /nonexistent.map").code == 1);
  CHECK(tfp_cli("sample-moments" + map + " --n-dim 8,4").code == 1);
  CHECK(tfp_cli("census --p 2 --k 3 --bogus").code == 1);
  CHECK(tfp_cli("").code == 1);
  CHECK(tfp_cli("census --help").code == 0);
  fs::remove_all(dir);
}

TEST_CASE("config file with flags winning") {
  auto dir = scratch();
  write(dir / "c.cfg", "# census run\np = 2\nk=3\nno-timestamp = true\n");
  CHECK(tfp_cli("census --config " + (dir / "c.cfg").string()).out == "p,k,enumerated,fuss_catalan\n2,3,5,5\n");
  CHECK(tfp_cli("census --config " + (dir / "c.cfg").string() + " --k 2").out ==
        "p,k,enumerated,fuss_catalan\n2,2,2,2\n");
  write(dir / "bad.cfg", "colours=s\n");
  CHECK(tfp_cli("census --config " + (dir / "bad.cfg").string()).code == 1);
  CHECK(tfp_cli("census --config " + (dir / "missing.cfg").string()).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("reports are reproducible and carry provenance") {
  auto dir = scratch();
  write(dir / "melon3.map", kMelon3);
  const std::string base =
      "sample-moments --map " + (dir / "melon3.map").string() + " --n-dim 3,4 --samples 300 --format json";
  auto a = tfp_cli(base + " --seed 17 --no-timestamp --workers 1");
  auto b = tfp_cli(base + " --seed 17 --no-timestamp --workers 4");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  auto j = nlohmann::json::parse(a.out);
  CHECK(j["rows"].size() == 2);  // one row per (map, N)
  CHECK(j["provenance"]["seed"] == 17);
  CHECK(j["provenance"]["config"]["samples"] == "300");
  CHECK(!j["provenance"]["build_id"].get<std::string>().empty());
  CHECK(!j["provenance"].contains("timestamp"));
  CHECK(j["rows"][0].contains("stderr"));
  CHECK(nlohmann::json::parse(j.dump()) == j);
  CHECK(nlohmann::json::parse(tfp_cli(base + " --seed 17").out)["provenance"].contains("timestamp"));
  auto other = nlohmann::json::parse(tfp_cli(base + " --seed 18 --no-timestamp").out);
  CHECK(other["rows"][0]["value"] != j["rows"][0]["value"]);
  fs::remove_all(dir);
}

TEST_CASE("sd-check and limits") {
  auto haar = tfp_cli("sd-check --kind haar --n-dim 6 --samples 2000");
  CHECK(haar.code == 0);
  CHECK(haar.out.rfind("map,N,residual,stderr,ratio,samples\n", 0) == 0);
  CHECK(tfp_cli("sd-check --kind gaussian --n-dim 4 --samples 2000").code == 0);
  auto dir = scratch();
  write(dir / "melon3.map", kMelon3);
  auto lim = tfp_cli("limit --map " + (dir / "melon3.map").string());
  CHECK(lim.out.find(",1/2,0.5\n") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cumulants from a distribution dump") {
  auto dir = scratch();
  // centered marginal with tr(a^2) = 1
  write(dir / "d.json",
        R"([{"map": "MAPv1 | pi: (1 2) | alpha: (1 2) | colors: a", "value": 0, "exact": "0"},
            {"map": "MAPv1 | pi: (1 2)(3 4) | alpha: (1 4)(2 3) | colors: a a", "value": 1, "exact": "1"}])");
  write(dir / "q.map", "MAPv1 | pi: (1 2)(3 4) | alpha: (1 4)(2 3) | colors: a a\n");
  auto r = tfp_cli("cumulants --dist " + (dir / "d.json").string() + " --map " + (dir / "q.map").string());
  CHECK(r.code == 0);
  CHECK(r.out.find(",1,1,1.0\n") != std::string::npos);
  fs::remove_all(dir);
}
