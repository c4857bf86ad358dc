#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "relaysec/cli.hpp"

using namespace relaysec;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream in(line);
  for (std::string c; std::getline(in, c, ',');) v.push_back(c);
  if (!line.empty() && line.back() == ',') v.emplace_back();
  return v;
}

std::string column(const std::string& csv, const std::string& name, std::size_t row = 1) {
  auto ls = lines(csv);
  auto head = cells(ls.at(0));
  auto body = cells(ls.at(row));
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (head[i] == name) return body.at(i);
  }
  FAIL("missing column " << name);
  return {};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST_CASE("eval prints one row per theta") {
  auto r = run({"eval", "--gamma-p-db", "30", "--rs", "1", "--theta", "0.1,0.5,1"});
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 4);
  CHECK(ls[0] ==
        "gamma_p_db,d,omega_sr,omega_rd,eta1,eta2,eta3,rs,rt,theta,gsop,gsop_asym,afe,afe_asym,ailr,ailr_asym,"
        "throughput");
  for (std::size_t i = 1; i < ls.size(); ++i) CHECK(cells(ls[i]).size() == cells(ls[0]).size());
  CHECK(std::stod(column(r.out, "gsop", 1)) < std::stod(column(r.out, "gsop", 3)));
  CHECK(std::stod(column(r.out, "afe")) == doctest::Approx(0.98224051069654295).epsilon(1e-8));
  CHECK(std::stod(column(r.out, "omega_sr")) == doctest::Approx(16.0));
}

TEST_CASE("eval with Monte Carlo columns") {
  auto r = run({"eval", "--rs", "1", "--mc-samples", "20000", "--seed", "3"});
  REQUIRE(r.code == 0);
  CHECK(column(r.out, "mc_samples") == "20000");
  CHECK(column(r.out, "seed") == "3");
  CHECK(!column(r.out, "mc_gsop_ci").empty());
}

TEST_CASE("invalid input exits with 2") {
  CHECK(run({"eval", "--eta", "0.2,0.2,0.2"}).code == cli::kInvalidInput);
  CHECK(run({"eval", "--eta", "0.2,0.2,0.2"}).err.find("eta sum") != std::string::npos);
  CHECK(run({"eval", "--theta", "0"}).code == cli::kInvalidInput);
  CHECK(run({"eval", "--theta", "1.5"}).code == cli::kInvalidInput);
  CHECK(run({"eval", "--rs", "2", "--rt", "1"}).code == cli::kInvalidInput);
  CHECK(run({"eval", "--d", "1.5"}).code == cli::kInvalidInput);
  CHECK(run({"eval", "--no-such-flag"}).code == cli::kInvalidInput);
  CHECK(run({"bogus"}).code == cli::kInvalidInput);
  CHECK(run({"mc", "--mc-samples", "10"}).code == cli::kInvalidInput);
  CHECK(run({"sweep", "--axis", "rs", "--values", ""}).code == cli::kInvalidInput);
  CHECK(run({"sweep", "--axis", "rs", "--values", "2,1"}).code == cli::kInvalidInput);
  CHECK(run({"sweep", "--axis", "nope", "--values", "1"}).code == cli::kInvalidInput);
  CHECK(run({"optimize", "--problem", "opa9"}).code == cli::kInvalidInput);
  CHECK(run({"preset", "fig1"}).code == cli::kInvalidInput);
}

TEST_CASE("optimize reports infeasible floors with 3") {
  auto r = run({"optimize", "--problem", "opa1", "--gamma-min", "10", "--particles", "20", "--iterations", "5"});
  CHECK(r.code == cli::kInfeasible);
  auto ok = run({"optimize", "--problem", "opa2", "--theta", "0.1", "--particles", "60", "--iterations", "20"});
  REQUIRE(ok.code == 0);
  CHECK(column(ok.out, "feasible") == "1");
  CHECK(std::stod(column(ok.out, "objective")) > 0.9);
  CHECK(std::stod(column(ok.out, "throughput")) > 0.5);
  CHECK(!ok.err.empty());
}

TEST_CASE("sweep schema and infeasible rows") {
  auto r = run({"sweep", "--axis", "gamma_min", "--values", "0.5,50", "--allocation", "epa", "--metrics",
                "gsop,throughput"});
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  auto head = cells(ls[0]);
  CHECK(head.front() == "series");
  CHECK(column(r.out, "feasible", 1) == "1");
  CHECK(column(r.out, "feasible", 2) == "0");
  // a fixed allocation reports its throughput peak when the floor is out of reach
  CHECK(std::stod(column(r.out, "throughput", 2)) < 50.0);

  auto opa = run({"sweep", "--axis", "gamma_min", "--values", "0.5,50", "--allocation", "opa1", "--particles",
                  "40", "--iterations", "10"});
  REQUIRE(opa.code == 0);
  CHECK(column(opa.out, "feasible", 2) == "0");
  CHECK(column(opa.out, "gsop", 2).empty());
  for (std::size_t i = 1; i < ls.size(); ++i) CHECK(cells(ls[i]).size() == head.size());
}

TEST_CASE("output is byte-identical across runs and job counts") {
  std::vector<std::string> base{"sweep", "--axis", "rs", "--values", "0.5,1,2", "--theta", "0.1,1",
                                "--mc-samples", "20000", "--seed", "9"};
  auto a = run(base);
  auto b = run(base);
  auto j1 = base;
  j1.insert(j1.end(), {"--jobs", "1"});
  auto j3 = base;
  j3.insert(j3.end(), {"--jobs", "3"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(run(j1).out == a.out);
  CHECK(run(j3).out == a.out);

  std::vector<std::string> opt{"optimize", "--problem", "opa3", "--particles", "40", "--iterations", "10",
                               "--seed", "4"};
  CHECK(run(opt).out == run(opt).out);
}

TEST_CASE("config file fills flags the command line leaves unset") {
  auto cfg = temp_file("relaysec_test.cfg", "# comment\nrs = 2\ngamma_p_db=40\n");
  auto from_file = run({"eval", "--config", cfg.string()});
  REQUIRE(from_file.code == 0);
  CHECK(column(from_file.out, "rs") == "2");
  CHECK(column(from_file.out, "gamma_p_db") == "40");

  auto override = run({"eval", "--config", cfg.string(), "--rs", "0.5"});
  REQUIRE(override.code == 0);
  CHECK(column(override.out, "rs") == "0.5");
  CHECK(column(override.out, "gamma_p_db") == "40");

  auto bad = temp_file("relaysec_bad.cfg", "warp = 9\n");
  CHECK(run({"eval", "--config", bad.string()}).code == cli::kInvalidInput);
  CHECK(run({"eval", "--config", "/nonexistent/relaysec.cfg"}).code == cli::kInvalidInput);
  std::filesystem::remove(cfg);
  std::filesystem::remove(bad);
}

TEST_CASE("--out writes the CSV to a file") {
  auto path = std::filesystem::temp_directory_path() / "relaysec_out.csv";
  std::filesystem::remove(path);
  auto r = run({"eval", "--out", path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == run({"eval"}).out);
  std::filesystem::remove(path);
}

TEST_CASE("preset names") {
  auto names = cli::preset_names();
  REQUIRE(names.size() == 8);
  CHECK(names.front() == "fig2");
  CHECK(names.back() == "fig9");
}
