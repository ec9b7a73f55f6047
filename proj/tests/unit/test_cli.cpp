#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <random>
#include <string>
#include <sys/wait.h>

#include "qcurv/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("QCURV_CLI");
  return p ? p : "";
}

int run(const std::string& args) {
  std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& name) {
  return fs::temp_directory_path() / ("qcurv_cli_" + name + "_" + std::to_string(std::random_device{}()));
}

}  // namespace

TEST_CASE("cli exit codes") {
  if (cli().empty()) {
    MESSAGE("QCURV_CLI not set; skipping");
    return;
  }
  fs::path out = scratch("codes");
  CHECK(run("") == 2);
  CHECK(run("nonsense") == 2);
  CHECK(run("linearize --tol-scale -1") == 2);
  CHECK(run("hybrid -o " + out.string() + " -s hybrid.Lambda=0.5*Lambda1") == 2);
  CHECK(run("family -o " + out.string() + " -s family.example=1a -s family.params=") == 2);
  CHECK(run("family -o " + out.string() + " -s family.bogus=1") == 2);
  CHECK(run("linearize -o /proc/qcurv_forbidden") == 3);
  fs::create_directories(out);
  qcurv::io::write_text_atomic(out / "fam.ini", "[run]\ncommand = family\n");
  CHECK(run("hybrid -c " + (out / "fam.ini").string()) == 2);
  CHECK(run("spherical -o " + out.string() + " -s spherical.r_max=0") == 2);
  fs::remove_all(out);
}

TEST_CASE("cli run, manifest and report") {
  if (cli().empty()) return;
  fs::path a = scratch("a"), b = scratch("b"), rep = scratch("rep");
  REQUIRE(run("linearize -o " + a.string() + " -s linearize.draws=2") == 0);
  REQUIRE(run("linearize -o " + b.string() + " -s linearize.draws=2 -j 2") == 0);
  auto ma = nlohmann::json::parse(qcurv::io::read_text(a / "manifest.json"));
  auto mb = nlohmann::json::parse(qcurv::io::read_text(b / "manifest.json"));
  CHECK(ma["all_checks_pass"] == true);
  CHECK(ma["artifacts"] == mb["artifacts"]);
  CHECK(run("report -o " + rep.string() + " -s report.dir=" + a.string()) == 0);
  qcurv::io::write_text_atomic(a / "draw_0.csv", "tampered\n");
  CHECK(run("report -o " + rep.string() + " -s report.dir=" + a.string()) == 1);
  CHECK(run("report -o " + rep.string() + " -s report.dir=" + (a / "missing").string()) == 3);
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(rep);
}

TEST_CASE("cli family and analyze round trip") {
  if (cli().empty()) return;
  fs::path a = scratch("fam"), b = scratch("ana");
  REQUIRE(run("family -o " + a.string() + " -s family.example=1b -s family.params=5,20,80") == 0);
  auto t = qcurv::io::read_csv(a / "family.csv");
  CHECK(t.rows.size() == 3);
  CHECK(t.rows.back()[t.column("case")] == "ii");
  std::string in = (a / "member_1.csv").string() + "," + (a / "member_2.csv").string();
  REQUIRE(run("analyze -o " + b.string() + " -s analyze.input=" + in) == 0);
  auto u = qcurv::io::read_csv(b / "family.csv");
  CHECK(u.numeric("u0")[1] == doctest::Approx(t.numeric("u0")[2]).epsilon(1e-9));
  fs::remove_all(a);
  fs::remove_all(b);
}
