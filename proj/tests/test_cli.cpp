#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const std::string cmd = std::string(HAZARDBAND_CLI) + " " + args + " 2> cli_stderr.txt";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp("cli_stderr.txt");
  return r;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const char* kD0 = "id,from,to,entry,exit\n1,0,1,0,1\n2,0,1,0,2\n3,0,cens,0,2.5\n";

const char* kTwoTransitions =
    "id,from,to,entry,exit\n"
    "1,0,1,0,0.5\n2,0,2,0,0.7\n3,0,1,0,1.1\n4,0,2,0,1.3\n5,0,1,0,1.6\n"
    "6,0,2,0,1.9\n7,0,cens,0,2.5\n8,0,1,0.2,2.2\n9,0,2,0,2.4\n10,0,cens,0,3\n";

}  // namespace

TEST_CASE("estimate on the three-subject file") {
  write("d0.csv", kD0);
  const Run r = run("estimate --data d0.csv --tau 3");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto& fit = j.at("transitions").at("0>1");
  CHECK(fit["estimate"]["values"][1].get<double>() == doctest::Approx(5.0 / 6.0));
  CHECK(fit["var_aalen"]["values"][1].get<double>() == doctest::Approx(13.0 / 12.0));
  CHECK(fit["var_greenwood"]["values"][1].get<double>() == doctest::Approx(43.0 / 72.0));
}

TEST_CASE("tau before the first event gives zero curves") {
  write("d0.csv", kD0);
  const Run r = run("estimate --data d0.csv --tau 0.5");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("transitions").at("0>1")["estimate"]["times"].empty());
  CHECK(j.at("transitions").at("0>1")["estimate"]["t0"] == 0.0);
}

TEST_CASE("input errors map to exit codes") {
  write("empty.csv", "");
  const Run empty = run("estimate --data empty.csv --tau 1");
  CHECK(empty.code == 2);
  CHECK(empty.err.find("empty") != std::string::npos);

  write("bad.csv", "id,from,to,entry,exit\n1,0,1,0,x\n");
  const Run bad = run("estimate --data bad.csv --tau 1");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 2") != std::string::npos);

  CHECK(run("estimate --data does_not_exist.csv --tau 1").code == 3);
  CHECK(run("estimate --tau 1").code == 2);
  CHECK(run("band --data d0.csv --tau 3 --transition '0>1' --interval 1:2 --kind nonsense").code == 2);
  CHECK(run("band --data d0.csv --tau 3 --transition '0>1' --interval 2").code == 2);
  CHECK(run("estimate --data d0.csv --tau 3 --bogus").code == 2);
  CHECK(run("test-equality --data two.csv --tau 3 --transition '0>1' --interval 0:3").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("every band kind runs") {
  write("two.csv", kTwoTransitions);
  for (const char* kind : {"ep-wild", "hw-wild", "direct-wild", "ep-asymptotic", "hw-asymptotic"}) {
    INFO(kind);
    const Run r = run(std::string("band --data two.csv --tau 3 --transition '0>1' --interval 0.5:2.5 --boot 200 "
                                  "--bridge-paths 200 --kind ") + kind);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["kind"] == kind);
    CHECK(j["time"].size() == j["lower"].size());
  }
  const Run early = run("band --data two.csv --tau 3 --transition '0>1' --interval 0.1:2.5 --kind ep-wild --boot 200");
  CHECK(early.code == 3);
  CHECK(early.err.find("precedes first event") != std::string::npos);
}

TEST_CASE("test commands run") {
  write("two.csv", kTwoTransitions);
  Run r = run("diff-band --data two.csv --tau 3 --transition '0>1' --transition2 '0>2' --interval 0:3 --boot 200");
  CHECK(r.code == 0);
  r = run("test-equality --data two.csv --tau 3 --transition '0>1' --transition2 '0>2' --interval 0:3 --boot 200");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["kind"] == "ks-equality");
  r = run("test-equality --data two.csv --data2 two.csv --tau 3 --transition '0>1' --interval 0:3 --boot 200");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["statistic"] == 0.0);
  r = run("test-equivalence --data two.csv --tau 3 --transition '0>1' --interval 0.5:2.5 --a0-rate 0.2 "
          "--margin-lower 5 --margin-upper 5 --boot 200");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["reject"] == true);
  r = run("test-prop --data two.csv --data2 two.csv --tau 3 --stat both --law both --boot 200");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.is_array());
  CHECK(j.size() == 4);
  CHECK(j[0]["statistic"] == 0.0);
}

TEST_CASE("simulate writes a readable csv") {
  Run r = run("simulate --scenario table3:II --group 2 --n 50 --seed 3");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("id,from,to,entry,exit\n", 0) == 0);
  write("sim.csv", r.out);
  CHECK(run("estimate --data sim.csv --tau 0.3").code == 0);
  r = run("simulate --scenario illness-death-recovery --n 20 --seed 3");
  CHECK(r.code == 0);
  CHECK(run("simulate --scenario nowhere --n 20").code == 2);
}

TEST_CASE("same seed gives byte-identical output") {
  write("two.csv", kTwoTransitions);
  const std::string cmd = "band --data two.csv --tau 3 --transition '0>1' --interval 0.5:2.5 --kind hw-wild --boot 300 "
                          "--seed 17";
  const Run a = run(cmd + " --threads 1");
  const Run b = run(cmd + " --threads 3");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const Run c = run(cmd.substr(0, cmd.size() - 2) + "18");
  CHECK(c.out != a.out);
}
