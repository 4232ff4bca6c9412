#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path& tmp() {
  static const fs::path dir = [] {
    fs::path d(DSDR_TEST_TMP);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (tmp() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string(DSDR_CLI_PATH) + " " + args + " >" + path("stdout.txt") +
                          " 2>" + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("simulate, fit and compare") {
  REQUIRE(run("simulate --model I --n 800 --p 4 --seed 3 --out " + path("sim.csv")) == 0);
  const std::string sim = slurp(path("sim.csv"));
  CHECK(sim.rfind("y,x1,x2,x3,x4\n", 0) == 0);
  CHECK(count_lines(sim) == 801);

  for (const char* engine : {"full", "naive", "refined"}) {
    CAPTURE(engine);
    const std::string args = std::string("fit --data ") + path("sim.csv") + " --engine " + engine +
                             " --k 4 --dim 2 --seed 1 --out-basis " + path("basis.csv") +
                             " --out-eigs " + path("eigs.txt") + " --out-json " + path("fit.json");
    REQUIRE(run(args) == 0);
    CHECK(count_lines(slurp(path("basis.csv"))) == 4);
    CHECK(count_lines(slurp(path("eigs.txt"))) == 4);
    CHECK(slurp(path("fit.json")).find("\"critical_path_seconds\"") != std::string::npos);
  }

  REQUIRE(run("compare --basis-a " + path("basis.csv") + " --basis-b " + path("basis.csv")) == 0);
  CHECK(std::stod(slurp(path("stdout.txt"))) == 0.0);

  write(path("e1.csv"), "1\n0\n");
  write(path("e2.csv"), "0.70710678118654757\n0.70710678118654757\n");
  REQUIRE(run("compare --basis-a " + path("e1.csv") + " --basis-b " + path("e2.csv")) == 0);
  CHECK(std::stod(slurp(path("stdout.txt"))) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bench output is byte-identical across runs") {
  write(path("bench.json"), R"({"experiments": [
    {"model": {"model_id": "I", "n": 600, "p": 4}, "engine": "full", "replicates": 2, "seed": 11},
    {"model": {"model_id": "III", "n": 600, "p": 4}, "engine": "refined", "variant": "wpsvm",
     "k": 3, "B": 2, "replicates": 2, "seed": 11, "compute_dcor": true}
  ]})");
  REQUIRE(run("bench --config " + path("bench.json") + " --out " + path("a.csv") + " --sidecar " +
              path("a.json")) == 0);
  REQUIRE(run("bench --config " + path("bench.json") + " --out " + path("b.csv")) == 0);
  const std::string a = slurp(path("a.csv"));
  CHECK(a == slurp(path("b.csv")));
  CHECK(a.rfind("model,engine,variant,n,p,k,B,replicates,mean_distance,sd_distance,mean_runtime_s,mean_dcor\n", 0) == 0);
  CHECK(count_lines(a) == 3);
  CHECK(slurp(path("a.json")).find("\"replicate_distances\"") != std::string::npos);
}

TEST_CASE("invalid input exits with 2") {
  CHECK(run("") == 2);
  CHECK(run("simulate --model V --out " + path("x.csv")) == 2);
  CHECK(run("fit --data " + path("missing.csv") + " --out-basis " + path("b.csv") + " --out-eigs " +
            path("e.txt")) == 2);
  CHECK(slurp(path("stderr.txt")).find("\"error\":\"Io\"") != std::string::npos);

  write(path("unknown.json"), R"({"model": {"model_id": "I"}, "engines": "full"})");
  CHECK(run("bench --config " + path("unknown.json") + " --out " + path("u.csv")) == 2);
  CHECK(slurp(path("stderr.txt")).find("InvalidConfig") != std::string::npos);
  write(path("broken.json"), "{not json");
  CHECK(run("bench --config " + path("broken.json") + " --out " + path("u.csv")) == 2);
  write(path("k.json"), R"({"model": {"model_id": "I", "n": 10}, "engine": "naive", "k": 20})");
  CHECK(run("bench --config " + path("k.json") + " --out " + path("u.csv")) == 2);

  // wpsvm on a continuous response is a caller error
  REQUIRE(run("simulate --model I --n 200 --p 3 --out " + path("cont.csv")) == 0);
  CHECK(run("fit --data " + path("cont.csv") + " --variant wpsvm --out-basis " + path("b.csv") +
            " --out-eigs " + path("e.txt")) == 2);
}

TEST_CASE("numeric failures exit with 3") {
  std::string flat = "y,x1,x2\n";
  for (int i = 0; i < 20; ++i) flat += "1," + std::to_string(i) + "," + std::to_string(i % 3) + "\n";
  write(path("flat.csv"), flat);
  CHECK(run("fit --data " + path("flat.csv") + " --out-basis " + path("b.csv") + " --out-eigs " +
            path("e.txt")) == 3);
  CHECK(slurp(path("stderr.txt")).find("DegenerateSlicing") != std::string::npos);

  write(path("rank1.csv"), "1,0\n2,0\n");
  write(path("other.csv"), "1,0\n0,1\n");
  CHECK(run("compare --basis-a " + path("rank1.csv") + " --basis-b " + path("other.csv")) == 3);
}
