#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <random>

#include "qcurv/config.hpp"
#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/io.hpp"
#include "qcurv/kernel.hpp"

using namespace qcurv;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("qcurv_test_" + name + "_" + std::to_string(std::random_device{}()));
  fs::create_directories(p);
  return p;
}
}  // namespace

TEST_CASE("number parsing") {
  CHECK(parse_number("1/24") == doctest::Approx(1.0 / 24));
  CHECK(parse_number(" 1.5*Lambda1 ") == doctest::Approx(1.5 * constants::Lambda1));
  CHECK(parse_number("gamma6/pi") == doctest::Approx(64 * constants::pi * constants::pi));
  CHECK(parse_number("-2.5e-3") == -2.5e-3);
  CHECK_THROWS_AS(parse_number("abc"), Error);
  CHECK_THROWS_AS(parse_number("1/0"), Error);
  CHECK_THROWS_AS(parse_number(""), Error);
  auto l = parse_list("1/24, 1/48,1/96");
  REQUIRE(l.size() == 3);
  CHECK(l[2] == doctest::Approx(1.0 / 96));
}

TEST_CASE("config schema and accessors") {
  RunConfig c = RunConfig::parse("[run]\nseed = 42\n[hybrid]\nLambda = 1.1*Lambda1\nnewton_fallback = no\n"
                                 "lambdas = 1/24, 1/48\n; comment\n[potential]\nkind = quadratic\nq = 0.5\n");
  CHECK(c.seed() == 42);
  CHECK(c.number("hybrid.Lambda", 0.0) == doctest::Approx(1.1 * constants::Lambda1));
  CHECK_FALSE(c.flag("hybrid.newton_fallback", true));
  CHECK(c.list("hybrid.lambdas").size() == 2);
  CHECK(c.potential()(1.0) == doctest::Approx(120.5));
  CHECK(c.number("hybrid.tol", 7.0) == 7.0);
  CHECK_FALSE(c.number("hybrid.tol").has_value());
  CHECK(RunConfig::parse("").seed() == 20240601);
  CHECK_THROWS_AS(RunConfig::parse("[hybrid]\nbogus = 1\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("[nowhere]\nx = 1\n"), Error);
  CHECK_THROWS_AS(RunConfig::parse("[potential]\nkind = cubic\n").potential(), Error);
  CHECK_THROWS_AS(RunConfig::parse("[hybrid]\nnewton_fallback = maybe\n").flag("hybrid.newton_fallback", true), Error);
  CHECK_THROWS_AS(RunConfig::parse("[grid]\nratio = 0.9\n").grid(), Error);
  RunConfig d = RunConfig::parse("");
  d.set("family.example", "1a");
  CHECK(d.str("family.example") == "1a");
  CHECK(RunConfig::parse(d.text()).str("family.example") == "1a");
  CHECK_THROWS_AS(d.set("family.nope", "1"), Error);
}

TEST_CASE("csv round trip keeps every bit") {
  io::CsvTable t;
  t.header = {"r", "x"};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(d(rng) * std::pow(10.0, i % 7 - 3));
    t.rows.push_back({io::format_double(i), io::format_double(xs.back())});
  }
  io::CsvTable u = io::parse_csv(io::to_csv(t));
  CHECK(u.header == t.header);
  auto back = u.numeric("x");
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(back[i] == xs[i]);
  CHECK_THROWS_AS(u.column("missing"), Error);
  CHECK_THROWS_AS(io::parse_csv("a,b\n1,zz\n").numeric("b"), Error);
}

TEST_CASE("jet tables round trip") {
  io::CsvTable t;
  t.header = {"r", "u", "du", "lap", "dlap", "bilap", "dbilap"};
  t.rows = {{"0", "1", "0", "-12", "0", "192", "0"}, {"0.5", "0.9", "-1", "-10", "3", "150", "-7"}};
  auto rows = io::jets_from_table(t);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].r == 0.5);
  CHECK(rows[1].dbilap() == -7.0);
}

TEST_CASE("kernel save and load") {
  fs::path dir = scratch("kernel");
  KernelTable k = build_log_kernel(RadialGrid::geometric(1.0, 1.3, 0.1, 1e-3), 4);
  io::save_kernel(dir / "k.bin", k);
  KernelTable l = io::load_kernel(dir / "k.bin");
  CHECK(l.order == k.order);
  CHECK(l.values == k.values);
  CHECK(l.s_weights == k.s_weights);
  io::write_text_atomic(dir / "bad.bin", "NOTAKERNEL");
  CHECK_THROWS_AS(io::load_kernel(dir / "bad.bin"), Error);
  std::string raw = io::read_text(dir / "k.bin");
  io::write_text_atomic(dir / "short.bin", raw.substr(0, raw.size() / 2));
  CHECK_THROWS_AS(io::load_kernel(dir / "short.bin"), Error);
  fs::remove_all(dir);
}

TEST_CASE("sha256 and manifest verification") {
  fs::path dir = scratch("manifest");
  io::write_text_atomic(dir / "abc.txt", "abc");
  CHECK(io::sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  io::Manifest m;
  m.command = "test";
  m.artifacts = {"abc.txt"};
  m.checks = {{"c1", 0.1, 1.0, true, ""}};
  io::write_manifest(dir, m);
  auto j = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  CHECK(j["all_checks_pass"] == true);
  CHECK(io::verify_manifest(dir).empty());
  io::write_text_atomic(dir / "abc.txt", "abd");
  CHECK(io::verify_manifest(dir) == std::vector<std::string>{"abc.txt"});
  CHECK_THROWS_AS(io::read_text(dir / "nope"), Error);
  fs::remove_all(dir);
}
