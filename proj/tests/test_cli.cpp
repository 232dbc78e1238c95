#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>

#include "common.hpp"
#include "json.hpp"

using json = nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs ewirec with `args` (shell-quoted by the caller) from the source tree.
Result ewirec(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      "cd '" + std::string(EWIRE_SOURCE_DIR) + "' && " + env + " '" + EWIREC_PATH + "' " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("check prints declaration types") {
  Result r = ewirec("check programs/flip.ew");
  CHECK(r.code == 0);
  CHECK(r.out.find("flip : Circ(I, bit)") != std::string::npos);
  CHECK(r.out.find("coin : T(bit)") != std::string::npos);
}

TEST_CASE("type errors exit 1 with a JSON record") {
  for (const auto& [file, kind] : {std::pair{"reuse_qubit.ew", "LinearityViolation"},
                                  std::pair{"unbox_monadic.ew", "EffectfulUnbox"}}) {
    Result r = ewirec(std::string("--json check tests/corpus/ill/") + file);
    INFO(r.out);
    CHECK(r.code == 1);
    json j = json::parse(r.out);
    CHECK(j["kind"] == kind);
    CHECK(j["span"]["line"].get<int>() >= 1);
    CHECK_FALSE(j["message"].get<std::string>().empty());
  }
}

TEST_CASE("run gives the exact distribution and reproducible samples") {
  Result r = ewirec("--json run programs/flip.ew");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["outcomes"]["0"].get<double>() == 0.5);
  CHECK(j["outcomes"]["1"].get<double>() == 0.5);
  CHECK(j["diverge_mass"].get<double>() == 0.0);

  Result a = ewirec("--json --shots 1000 --seed 7 run programs/flip.ew");
  Result b = ewirec("--json --shots 1000 --seed 7 run programs/flip.ew");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  json s = json::parse(a.out);
  CHECK(s["counts"]["0"].get<int>() + s["counts"]["1"].get<int>() == 1000);

  Result init = ewirec("--json run tests/corpus/well/point_mass.ew");
  CHECK(init.code == 0);
  CHECK(json::parse(init.out)["outcomes"].size() == 1);
}

TEST_CASE("divergence is reported as missing mass") {
  Result r = ewirec("--mode cpsu --json run programs/hs.ew stuck");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["diverge_mass"].get<double>() == 1.0);
  // Recursion needs the subunital model.
  CHECK(ewirec("run programs/hs.ew stuck").code == 1);
}

TEST_CASE("denote serializes the Heisenberg matrix") {
  Result r = ewirec("--json denote programs/comp.ew h");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["source_blocks"] == json::array({2}));
  CHECK(j["target_blocks"] == json::array({2}));
  const oracle::Mat want = oracle::unitary_channel(oracle::hadamard());
  REQUIRE(j["matrix"].size() == 4);
  double err = 0;
  for (int row = 0; row < 4; ++row)
    for (int col = 0; col < 4; ++col) {
      const auto& e = j["matrix"][row][col];
      err += std::abs(oracle::C(e[0].get<double>(), e[1].get<double>()) - want(row, col));
    }
  CHECK(err < 1e-11);
  CHECK(j["cp"] == true);
  CHECK(j["unital"] == true);

  Result q = ewirec("--mode cpsu --qlist-size 3 --json denote programs/qft.ew fourier");
  REQUIRE(q.code == 0);
  json f = json::parse(q.out);
  CHECK(f["matrix"].size() == 64);
  CHECK(f["matrix"][0].size() == 64);
}

TEST_CASE("normalize and equiv") {
  Result n = ewirec("normalize programs/comp.ew hx");
  CHECK(n.code == 0);
  CHECK(n.out.find("unbox") == std::string::npos);
  CHECK(n.out.find("gate H") < n.out.find("gate X"));

  Result t = ewirec("--trace normalize programs/comp.ew hx");
  CHECK(t.code == 0);
  json first = json::parse(t.out.substr(0, t.out.find('\n')));
  CHECK(first.contains("step"));
  CHECK(first.contains("rule"));

  CHECK(ewirec("equiv programs/comp.ew hxh z").code == 0);
  CHECK(ewirec("equiv programs/comp.ew h x").code == 1);
}

TEST_CASE("exit codes for usage and resource errors") {
  CHECK(ewirec("").code == 3);
  CHECK(ewirec("--shots 5 check programs/flip.ew").code == 3);
  CHECK(ewirec("--mode quantum check programs/flip.ew").code == 3);
  CHECK(ewirec("check does/not/exist.ew").code == 3);
  CHECK(ewirec("--mode cpsu --qlist-size 3 denote programs/qft.ew fourier", "EWIREC_MAX_DIM=4").code == 2);
}

TEST_CASE("output is deterministic") {
  for (const char* args : {"--json denote programs/classical_control.ew cc", "--json check programs/qft.ew",
                           "--trace normalize programs/comp.ew hxh"}) {
    Result a = ewirec(args), b = ewirec(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
}
