#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(FRACAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int data_rows(const std::string& csv) {
  int rows = 0;
  bool header_seen = false;
  size_t pos = 0;
  while (pos < csv.size()) {
    size_t eol = csv.find('\n', pos);
    if (eol == std::string::npos) eol = csv.size();
    const std::string line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("fracap_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("") == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("green-verify") == 2);              // missing --s
  CHECK(run("green-verify --s 1.5") == 2);      // out of range
  CHECK(run("green-verify --s 0.5 --n 3") == 2);
  CHECK(run("approximate --caloric --s 0.5 --k 0") == 2);  // missing --target
  CHECK(run("approximate --caloric --d0 --s 0.5 --target x") == 2);
  CHECK(run("approximate --s 0.5 --target x") == 2);       // neither operator
  CHECK(run("approximate --caloric --s 0.5 --target y^2") == 2);
  CHECK(run("approximate --caloric --s 0.5 --target x^") == 2);
  CHECK(run("approximate --caloric --s 0.5 --target 1++") == 2);
  CHECK(run("--config /no/such/file green-verify --s 0.5") == 2);
}

TEST_CASE("help exits cleanly") {
  CHECK(run("--help") == 0);
  CHECK(run("green-verify --help") == 0);
  CHECK(run("approximate --help") == 0);
}

TEST_CASE("green-verify writes tables, manifest, and reruns identically") {
  TempDir d1, d2;
  CHECK(run("green-verify --n 1 --s 0.5 --out " + d1.str()) == 0);
  CHECK(fs::exists(d1.path / "goa.csv"));
  CHECK(fs::exists(d1.path / "footnote.csv"));

  const std::string man_text = slurp(d1.path / "green-verify.manifest.json");
  const auto man = nlohmann::json::parse(man_text);
  CHECK(man.at("command") == "green-verify");
  CHECK(std::stod(man.at("params").at("footnote_max_rel").get<std::string>()) <= 1e-8);

  // manifest digest matches the digest recorded inside the csv
  const std::string goa = slurp(d1.path / "goa.csv");
  const std::string digest = man.at("csv_digest").get<std::string>();
  CHECK(goa.find("# digest=" + digest) != std::string::npos);

  CHECK(run("green-verify --n 1 --s 0.5 --out " + d2.str()) == 0);
  CHECK(slurp(d2.path / "goa.csv") == goa);
  CHECK(slurp(d2.path / "footnote.csv") == slurp(d1.path / "footnote.csv"));
}

TEST_CASE("geometric eps sequence has the requested length") {
  TempDir d;
  CHECK(run("green-verify --n 1 --s 0.5 --eps-min 1e-4 --eps-max 1e-2 --eps-count 5 --out " +
            d.str()) == 0);
  const std::string goa = slurp(d.path / "goa.csv");
  CHECK(data_rows(goa) == 5);
}

TEST_CASE("config file adjusts the quadrature") {
  TempDir d;
  std::ofstream(d.path / "q.cfg") << "quad.radial_nodes=12\nquad.grading_levels=20\n";
  CHECK(run("--config " + (d.path / "q.cfg").string() + " green-verify --n 1 --s 0.5 --out " +
            d.str()) == 0);
  // coarser quadrature changes the recorded table
  TempDir d2;
  CHECK(run("green-verify --n 1 --s 0.5 --out " + d2.str()) == 0);
  CHECK(slurp(d.path / "goa.csv") != slurp(d2.path / "goa.csv"));
}

TEST_CASE("eigen command emits profile and boundary tables") {
  TempDir d;
  CHECK(run("eigen --n 1 --s 0.5 --out " + d.str()) == 0);
  CHECK(fs::exists(d.path / "eigen_profile.csv"));
  CHECK(fs::exists(d.path / "eigen_boundary.csv"));
  const auto man = nlohmann::json::parse(slurp(d.path / "eigen.manifest.json"));
  const double lambda = std::stod(man.at("params").at("lambda").get<std::string>());
  CHECK(lambda == doctest::Approx(1.1577738837).epsilon(1e-6));
  CHECK(data_rows(slurp(d.path / "eigen_boundary.csv")) == 3);
}

TEST_CASE("approximate with the zero target returns the zero field") {
  TempDir d;
  CHECK(run("approximate --caloric --s 0.5 --target 0 --k 0 --eps 0.05 --out " + d.str()) == 0);
  CHECK(fs::exists(d.path / "result.json"));
  const auto man = nlohmann::json::parse(slurp(d.path / "approximate.manifest.json"));
  CHECK(man.at("params").at("met") == "1");
  CHECK(std::stod(man.at("params").at("achieved_ck_error").get<std::string>()) == 0.0);
  const std::string grid = slurp(d.path / "error_grid.csv");
  CHECK(data_rows(grid) == 17 * 17);
  // every u sample is exactly zero
  CHECK(grid.find(",0,0,0") != std::string::npos);
}
