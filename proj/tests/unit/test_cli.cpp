#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgda/cli.hpp"
#include "sgda/experiment.hpp"

using namespace sgda;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sgda");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

const char* kKlConfig = R"({
  "problem": {"name": "kl-example", "params": {"dim_x": 1}},
  "tuner": {"epsilon": 0.1},
  "solver": {"y0": [1.5], "trace_stride": 50},
  "seeds": [3]
})";

const char* kQuadConfig = R"({
  "problem": {"name": "quadratic",
              "params": {"A": [[1, 0], [0, 0.5]], "B": [[1], [0.5]], "C": [[1]],
                         "N": 12, "heterogeneity": 0.2, "offset_noise": 0.3, "box_x": 2, "box_y": 2}},
  "tuner": {"epsilon": 0.5},
  "solver": {"K": 30, "T": 3, "M": 2, "alpha_x": 0.1, "alpha_y": 0.1, "beta": 0.5, "r": 1.0},
  "seeds": [1, 2]
})";

}  // namespace

TEST_CASE("KL-example run reaches the dual tolerance") {
  TempDir dir("sgda_cli_kl");
  const fs::path cfg = write(dir.path / "kl.json", kKlConfig);
  REQUIRE(cli({"--quiet", "run", cfg.string(), "--out", (dir.path / "out").string()}) == 0);
  const Json s = Json::parse(slurp(dir.path / "out" / "summary.json"));
  REQUIRE(s["runs"].size() == 1);
  CHECK(s["runs"][0]["final_res_y"].get<double>() <= 0.1);
  CHECK(s["audit"]["entries"].size() > 20);
  CHECK(fs::exists(dir.path / "out" / "trace_seed_3.csv"));
}

TEST_CASE("invalid configs exit 2 without output") {
  TempDir dir("sgda_cli_bad");
  const fs::path out = dir.path / "out";
  const char* bad[] = {
      R"({"problem": {"name": "kl-example"}, "tuner": {"epsilon": -0.1}})",
      R"({"problem": {"name": "kl-example"}, "tuner": {"epsilon": 0.1}, "extra": 1})",
      R"({"problem": {"name": "nope"}, "tuner": {"epsilon": 0.1}})",
      R"({"problem": {"name": "kl-example", "params": {"dim_y": 2}}, "tuner": {"epsilon": 0.1}})",
      R"({"problem": {"name": "kl-example"}, "tuner": {"epsilon": 0.1}, "solver": {"x0": [0, 0, 0]}})",
      R"({"problem": {"name": "quadratic", "params": {"A": [[0]], "B": [[0]], "C": [[1]]}}, "tuner": {"epsilon": 0.1}})",
      R"({"problem": {"name": "kl-example"}, "tuner": {"epsilon": 0.1}, "seeds": [1, 1]})",
      "{not json"};
  for (const char* text : bad) {
    const fs::path cfg = write(dir.path / "bad.json", text);
    CHECK(cli({"--quiet", "run", cfg.string(), "--out", out.string()}) == 2);
    CHECK_FALSE(fs::exists(out));
  }
  CHECK(cli({"--quiet", "run", (dir.path / "missing.json").string()}) == 2);
}

TEST_CASE("infeasible schedules exit 4") {
  TempDir dir("sgda_cli_infeasible");
  const fs::path cfg = write(dir.path / "c.json",
                             R"({"problem": {"name": "kl-example"}, "tuner": {"epsilon": 0.1, "overrides": {"r": 3}}})");
  CHECK(cli({"--quiet", "run", cfg.string(), "--out", (dir.path / "out").string()}) == 4);
  const fs::path cap = write(dir.path / "d.json",
                             R"({"problem": {"name": "kl-example"}, "tuner": {"epsilon": 0.001, "sample_cap": 10}})");
  CHECK(cli({"--quiet", "run", cap.string(), "--out", (dir.path / "out").string()}) == 4);
  CHECK_FALSE(fs::exists(dir.path / "out"));
}

TEST_CASE("two seeds give distinct reproducible traces") {
  TempDir dir("sgda_cli_seeds");
  const fs::path cfg = write(dir.path / "q.json", kQuadConfig);
  REQUIRE(cli({"--quiet", "run", cfg.string(), "--out", (dir.path / "a").string()}) == 0);
  REQUIRE(cli({"--quiet", "run", cfg.string(), "--out", (dir.path / "b").string()}) == 0);
  const std::string a1 = slurp(dir.path / "a" / "trace_seed_1.csv");
  const std::string a2 = slurp(dir.path / "a" / "trace_seed_2.csv");
  CHECK(a1 != a2);
  CHECK(a1 == slurp(dir.path / "b" / "trace_seed_1.csv"));
  CHECK(slurp(dir.path / "a" / "summary.json") == slurp(dir.path / "b" / "summary.json"));
  CHECK(a1.rfind("k,tau,dx_norm,dy_norm,xz_gap,samples,res_x,res_y,lyapunov\n", 0) == 0);

  // --seed replaces the list, --trace-stride thins the trace
  REQUIRE(cli({"--quiet", "run", cfg.string(), "--out", (dir.path / "c").string(), "--seed", "7",
               "--trace-stride", "10"}) == 0);
  CHECK(fs::exists(dir.path / "c" / "trace_seed_7.csv"));
  CHECK_FALSE(fs::exists(dir.path / "c" / "trace_seed_1.csv"));
  const std::string c7 = slurp(dir.path / "c" / "trace_seed_7.csv");
  CHECK(std::count(c7.begin(), c7.end(), '\n') == 1 + 9 + 1);
}

TEST_CASE("DRO problems run from the config") {
  TempDir dir("sgda_cli_dro");
  const fs::path cfg = write(dir.path / "g.json", R"({
    "problem": {"name": "group-dro", "params": {"synthetic": {"n": 60, "dim": 2, "seed": 1}, "loss": "absolute",
                                                 "lambda": 0.05}},
    "tuner": {"epsilon": 0.5, "overrides": {"K": 5, "T": 2, "M": 4}},
    "solver": {"residual_stride": 0},
    "output": {"formats": ["json"]}
  })");
  REQUIRE(cli({"--quiet", "run", cfg.string(), "--out", (dir.path / "o").string()}) == 0);
  const Json s = Json::parse(slurp(dir.path / "o" / "summary.json"));
  CHECK(s["lambda"] == 0.05);
  CHECK_FALSE(fs::exists(dir.path / "o" / "trace_seed_0.csv"));

  const fs::path phi = write(dir.path / "p.json", R"({
    "problem": {"name": "phi-div-dro", "params": {"synthetic": {"n": 20, "dim": 2}, "divergence": "chi_square",
                                                   "lambda_pen": 1.0}},
    "tuner": {"epsilon": 0.5, "overrides": {"K": 3}}
  })");
  CHECK(cli({"--quiet", "run", phi.string(), "--out", (dir.path / "p").string()}) == 0);
}

TEST_CASE("verify command") {
  CHECK(cli({"verify", "no-such-suite"}) == 2);
  CHECK(cli({"verify", "kl-example"}) == 0);
  CHECK(cli({"verify", "projections"}) == 0);
  CHECK(cli({}) == 2);
}
