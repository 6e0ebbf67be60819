#include <doctest.h>

#include "homog/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace homog;

namespace {

std::string temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("homogctl-test-" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::vector<const char*> argv = {"homogctl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  ExperimentSpec spec = parse_spec(static_cast<int>(argv.size()), argv.data());
  int code = run(spec, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("spec parsing") {
  SUBCASE("flags") {
    const char* argv[] = {"homogctl", "rate",   "--example", "layered-real-1d",
                          "--cutoff", "24",     "--grid",    "11",
                          "--tau",    "2.5",    "--s",       "1.5",
                          "--seed",   "7",      "--out",     "/tmp/x"};
    ExperimentSpec spec = parse_spec(16, argv);
    CHECK(spec.command == "rate");
    CHECK(spec.example == "layered-real-1d");
    CHECK(spec.cutoff == 24);
    CHECK(spec.grid == 11);
    CHECK(spec.tau == 2.5);
    CHECK(spec.s == 1.5);
    CHECK(spec.seed == 7);
    CHECK(spec.out_dir == "/tmp/x");
  }
  SUBCASE("config overrides flags") {
    std::string dir = temp_dir("cfg");
    std::string cfg = dir + "/cfg.json";
    std::ofstream(cfg) << R"({"example":"hill-body","s":2.0,"cutoff":12})";
    const char* argv[] = {"homogctl", "effmat", "--example", "layered-real-1d",
                          "--cutoff", "64",     "--config",  cfg.c_str()};
    ExperimentSpec spec = parse_spec(8, argv);
    CHECK(spec.example == "hill-body");
    CHECK(spec.cutoff == 12);
  }
  SUBCASE("unknown config keys are rejected") {
    std::string dir = temp_dir("badcfg");
    std::string cfg = dir + "/cfg.json";
    std::ofstream(cfg) << R"({"example":"hill-body","cutof":12})";
    const char* argv[] = {"homogctl", "effmat", "--config", cfg.c_str()};
    CHECK_THROWS_AS(parse_spec(4, argv), Error);
  }
  SUBCASE("unknown flags are rejected") {
    const char* argv[] = {"homogctl", "effmat", "--nope", "3"};
    CHECK_THROWS_AS(parse_spec(4, argv), Error);
  }
}

TEST_CASE("csv emitter and parser round trip") {
  SUBCASE("empty sample list gives a header-only file") {
    std::ostringstream os;
    write_csv(os, {"a", "b"}, {});
    CHECK(os.str() == "a,b\r\n");
  }
  SUBCASE("quoting and bitwise round trip of decimal text") {
    std::vector<std::string> header = {"name", "value", "note"};
    std::vector<std::vector<std::string>> rows = {
        {"plain", format_double(1.0 / 3.0), "x"},
        {"with,comma", format_double(-2.5e-17), "quote\"inside"},
        {"multi\nline", format_double(6.513368798e-03), ""},
    };
    std::ostringstream os;
    write_csv(os, header, rows);
    std::istringstream is(os.str());
    auto parsed = parse_csv(is);
    REQUIRE(parsed.size() == rows.size() + 1);
    CHECK(parsed[0] == header);
    for (size_t i = 0; i < rows.size(); ++i) CHECK(parsed[i + 1] == rows[i]);
  }
}

TEST_CASE("svg emitter draws markers and the fitted segment") {
  std::ostringstream os;
  write_loglog_svg(os, {0.1, 0.01}, {0.2, 0.02}, 1.0, 0.69);
  std::string svg = os.str();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), 'c') >= 2);  // two circles
  size_t first = svg.find("<circle");
  size_t second = svg.find("<circle", first + 1);
  CHECK(first != std::string::npos);
  CHECK(second != std::string::npos);
  CHECK(svg.find("slope 1") != std::string::npos);
}

TEST_CASE("effmat echoes a constant field") {
  std::string dir = temp_dir("effmat");
  std::string out;
  int code = run_cli({"effmat", "--example", "hill-body", "--cutoff", "24", "--out", dir}, &out);
  CHECK(code == 0);
  CHECK(out.find("\"g0\"") != std::string::npos);
  CHECK(std::filesystem::exists(dir + "/effmat-hill-body.json"));
}

TEST_CASE("germ sweep emits one row per direction") {
  std::string dir = temp_dir("germ");
  std::string out;
  int code = run_cli({"germ-sweep", "--example", "elasticity-87", "--cutoff", "24", "--out", dir},
                     &out);
  CHECK(code == 0);
  std::istringstream is(slurp(dir + "/germ-elasticity-87.csv"));
  auto rows = parse_csv(is);
  CHECK(rows.size() == 17);  // header + 16 default directions
  CHECK(rows[0][0] == "theta");
}

TEST_CASE("rate command records the slope") {
  std::string dir = temp_dir("rate");
  std::string out;
  int code = run_cli({"rate", "--example", "layered-real-1d", "--cutoff", "32", "--grid", "17",
                      "--s", "1.5", "--out", dir, "--svg"},
                     &out);
  CHECK(code == 0);
  std::string json_text = slurp(dir + "/rate-layered-real-1d.json");
  auto pos = json_text.find("\"slope\"");
  REQUIRE(pos != std::string::npos);
  double slope = std::stod(json_text.substr(json_text.find(':', pos) + 1));
  CHECK(slope >= 0.95);
  CHECK(std::filesystem::exists(dir + "/rate-layered-real-1d.svg"));
  CHECK(std::filesystem::exists(dir + "/rate-layered-real-1d.csv"));
}

TEST_CASE("deterministic outputs for identical specs") {
  std::string dir1 = temp_dir("det1"), dir2 = temp_dir("det2");
  run_cli({"germ-sweep", "--example", "acoustics-complex-0.2", "--cutoff", "16", "--seed", "3",
           "--out", dir1});
  run_cli({"germ-sweep", "--example", "acoustics-complex-0.2", "--cutoff", "16", "--seed", "3",
           "--out", dir2});
  CHECK(slurp(dir1 + "/germ-acoustics-complex-0.2.csv") ==
        slurp(dir2 + "/germ-acoustics-complex-0.2.csv"));
}

TEST_CASE("inline field specification") {
  std::string dir = temp_dir("inline");
  std::string cfg = dir + "/cfg.json";
  // scalar 1-d field 2 + sin(x1) given as a trig dictionary
  std::ofstream(cfg) << R"({
    "command": "effmat",
    "out": ")" << dir << R"(",
    "cutoff": 32,
    "field": {
      "name": "inline-layered",
      "symbol": "gradient",
      "g": {
        "dim": 1, "rows": 1, "cols": 1, "grid": 32,
        "hermitian": true, "positive": true,
        "terms": [
          {"freq": [0], "re": [[2.0]]},
          {"freq": [1], "re": [[0.0]], "im": [[-0.5]]},
          {"freq": [-1], "re": [[0.0]], "im": [[0.5]]}
        ]
      }
    }
  })";
  const char* argv[] = {"homogctl", "effmat", "--config", cfg.c_str()};
  ExperimentSpec spec = parse_spec(4, argv);
  std::ostringstream out, err;
  int code = run(spec, out, err);
  CHECK(code == 0);
  // g0 for 2 + sin is sqrt(3)
  std::string text = out.str();
  CHECK(text.find("1.7320508") != std::string::npos);
}

TEST_CASE("lattice supplied through the config") {
  std::string dir = temp_dir("lattice");
  std::string cfg = dir + "/cfg.json";
  // rectangular cell: a1 = (4 pi), dual 1/2, r0 = 1/4
  std::ofstream(cfg) << R"({
    "command": "effmat",
    "out": ")" << dir << R"(",
    "cutoff": 32,
    "lattice": [[12.566370614359172]],
    "field": {
      "name": "stretched",
      "symbol": "gradient",
      "g": {
        "dim": 1, "rows": 1, "cols": 1,
        "hermitian": true, "positive": true,
        "terms": [
          {"freq": [0], "re": [[2.0]]},
          {"freq": [1], "re": [[0.0]], "im": [[-0.5]]},
          {"freq": [-1], "re": [[0.0]], "im": [[0.5]]}
        ]
      }
    }
  })";
  const char* argv[] = {"homogctl", "effmat", "--config", cfg.c_str()};
  ExperimentSpec spec = parse_spec(4, argv);
  std::ostringstream out, err;
  // harmonic mean is lattice-independent for the scalar cell problem
  CHECK(run(spec, out, err) == 0);
  CHECK(out.str().find("1.7320508") != std::string::npos);
}

TEST_CASE("thread count does not change sweep results") {
  std::string dir1 = temp_dir("thr1"), dir4 = temp_dir("thr4");
  run_cli({"cos-error", "--example", "layered-real-1d", "--cutoff", "16", "--grid", "5",
           "--threads", "1", "--out", dir1});
  run_cli({"cos-error", "--example", "layered-real-1d", "--cutoff", "16", "--grid", "5",
           "--threads", "4", "--out", dir4});
  CHECK(slurp(dir1 + "/cos-error-layered-real-1d.csv") ==
        slurp(dir4 + "/cos-error-layered-real-1d.csv"));
}

TEST_CASE("reproduce pipelines") {
  for (const std::string name :
       {"isotropic-elasticity", "elasticity-87", "acoustics-complex-0.2", "hill-body",
        "layered-real-1d"}) {
    ReproduceReport rep = run_reproduce(name);
    CHECK(rep.pass());
    for (const auto& row : rep.rows) {
      CHECK(!row.provenance.empty());
      CHECK(row.pass);
    }
  }
  std::string dir = temp_dir("reproduce");
  std::string out;
  int code = run_cli({"reproduce", "isotropic-elasticity", "--out", dir}, &out);
  CHECK(code == 0);
  CHECK(out.find("145.658") != std::string::npos);
  CHECK(out.find("literature") != std::string::npos);
}

TEST_CASE("unknown command exits with usage error") {
  ExperimentSpec spec;
  spec.command = "frobnicate";
  std::ostringstream out, err;
  CHECK(run(spec, out, err) == 2);
  CHECK(err.str().find("error") != std::string::npos);
}

TEST_SUITE_END();
