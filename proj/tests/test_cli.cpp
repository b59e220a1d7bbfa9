#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef VCANOVA_CLI_PATH
#error "VCANOVA_CLI_PATH must be defined"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "vcanova_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const auto out_path = scratch_dir() / "stdout.txt";
  const auto err_path = scratch_dir() / "stderr.txt";
  const std::string cmd = std::string(VCANOVA_CLI_PATH) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const auto p = scratch_dir() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

const std::string kOneWayModel = R"({
  "design": "one_way",
  "factors": [{"name": "A", "levels": 2, "kind": "fixed"}],
  "replicates": 2
})";

const std::string kOneWayRandomModel = R"({
  "design": "one_way",
  "factors": [{"name": "A", "levels": 3, "kind": "random"}],
  "replicates": 4
})";

const std::string kRcbdModel = R"({
  "design": "rcbd",
  "factors": [
    {"name": "A", "levels": 2, "kind": "fixed"},
    {"name": "B", "levels": 2, "kind": "random"}
  ],
  "replicates": 1
})";

}  // namespace

TEST_CASE("analyze renders the one-way table") {
  const auto model = write_file("one_way.json", kOneWayModel);
  const auto data = write_file("one_way.csv", "A,y\n1,1\n1,2\n2,3\n2,4\n");
  const auto r = run_cli("analyze --data " + data.string() + " --model " + model.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("Source") != std::string::npos);
  CHECK(r.out.find("8") != std::string::npos);
  CHECK(r.out.find("Error") != std::string::npos);

  const auto rcsv =
      run_cli("analyze --data " + data.string() + " --model " + model.string() + " --format csv");
  CHECK(rcsv.exit_code == 0);
  CHECK(rcsv.out.find("A,1,4,4,") != std::string::npos);
}

TEST_CASE("analyze of the rcbd example") {
  const auto model = write_file("rcbd.json", kRcbdModel);
  const auto data = write_file("rcbd.csv", "A,B,y\n1,1,1\n1,2,2\n2,1,3\n2,2,5\n");
  const auto r = run_cli("analyze --data " + data.string() + " --model " + model.string() +
                         " --format csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("A,1,6.25,") != std::string::npos);
  CHECK(r.out.find("B,1,2.25,") != std::string::npos);
  CHECK(r.out.find("Error,1,0.25,") != std::string::npos);
}

TEST_CASE("missing cell exits 2 and names the cell") {
  const auto model = write_file("one_way.json", kOneWayModel);
  const auto data = write_file("short.csv", "A,y\n1,1\n1,2\n2,3\n");
  const auto r = run_cli("analyze --data " + data.string() + " --model " + model.string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("unbalanced: cell A=2 has 1 of 2 replicates") != std::string::npos);
}

TEST_CASE("missing input file exits 1") {
  const auto model = write_file("one_way.json", kOneWayModel);
  const auto r =
      run_cli("analyze --data /nonexistent/nope.csv --model " + model.string());
  CHECK(r.exit_code == 1);
}

TEST_CASE("simulate then analyze round-trips for every design") {
  const std::string split_plot = R"({
    "design": "split_plot",
    "factors": [
      {"name": "Block", "levels": 3, "kind": "random"},
      {"name": "A", "levels": 2, "kind": "fixed"},
      {"name": "B", "levels": 2, "kind": "fixed"}
    ],
    "replicates": 1,
    "interaction": "fixed"
  })";
  const std::string two_way = R"({
    "design": "two_way_interaction",
    "factors": [
      {"name": "A", "levels": 2, "kind": "random"},
      {"name": "B", "levels": 3, "kind": "fixed"}
    ],
    "replicates": 2,
    "interaction": "random"
  })";
  int idx = 0;
  for (const std::string& model_text : {kOneWayModel, kRcbdModel, two_way, split_plot}) {
    const auto model = write_file("m" + std::to_string(idx) + ".json", model_text);
    const auto out = scratch_dir() / ("sim" + std::to_string(idx) + ".csv");
    const auto sim = run_cli("simulate --model " + model.string() + " --seed 9 --out " +
                             out.string());
    CHECK(sim.exit_code == 0);
    const auto ana = run_cli("analyze --data " + out.string() + " --model " + model.string());
    CHECK(ana.exit_code == 0);
    CHECK(ana.out.find("Total") != std::string::npos);
    ++idx;
  }
}

TEST_CASE("power prints alpha for a null effect") {
  const auto model = write_file("one_way_random.json", kOneWayRandomModel);
  const auto r = run_cli("power --model " + model.string() + " --alpha 0.05");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("A: 0.05") != std::string::npos);

  const auto rj = run_cli("power --model " + model.string() +
                          " --var A=2 --alpha 0.05 --format json");
  CHECK(rj.exit_code == 0);
  CHECK(rj.out.find("\"A\"") != std::string::npos);
}

TEST_CASE("verify: exit 0 on pass, 3 on injected wrong laws, 2 below minimum reps") {
  const auto model = write_file("one_way_random.json", kOneWayRandomModel);
  const std::string base = "verify --model " + model.string() +
                           " --sigma2 1 --var A=2 --reps 4000 --seed 2030 --workers 2";
  const auto ok = run_cli(base);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("overall: PASS") != std::string::npos);

  const auto bad = run_cli(base + " --inject-wrong-laws");
  CHECK(bad.exit_code == 3);
  CHECK(bad.out.find("overall: FAIL") != std::string::npos);

  const auto tiny = run_cli("verify --model " + model.string() + " --reps 10");
  CHECK(tiny.exit_code == 2);
  CHECK(tiny.err.find("reps below minimum") != std::string::npos);

  const auto neg = run_cli("verify --model " + model.string() + " --var A=-1 --reps 2000");
  CHECK(neg.exit_code == 2);
}

TEST_CASE("verify writes a byte-identical JSON report for identical flags") {
  const auto model = write_file("one_way_random.json", kOneWayRandomModel);
  const auto out1 = scratch_dir() / "report1.json";
  const auto out2 = scratch_dir() / "report2.json";
  const std::string base = "verify --model " + model.string() +
                           " --sigma2 1 --var A=2 --reps 2000 --seed 78 --workers 3 --out ";
  CHECK(run_cli(base + out1.string()).exit_code == 0);
  CHECK(run_cli(base + out2.string()).exit_code == 0);
  std::ifstream f1(out1), f2(out2);
  std::ostringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().find("\"master_seed\": 78") != std::string::npos);
}

TEST_CASE("bad model JSON exits 2") {
  const auto model = write_file("bad.json", "{\"design\": \"one_way\"}");
  const auto data = write_file("one_way.csv", "A,y\n1,1\n1,2\n2,3\n2,4\n");
  const auto r = run_cli("analyze --data " + data.string() + " --model " + model.string());
  CHECK(r.exit_code == 2);
}
