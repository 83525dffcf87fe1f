#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nonclass/cli.hpp"

namespace fs = std::filesystem;
using nonclass::io::json;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "nonclass");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = nonclass::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("nonclass_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    for (const char* name : {"motzkin", "robinson", "vacuum", "fock-1", "tura-17", "ghz-3", "ghz-witness-3"})
      ASSERT_EQ(run({"catalog", "dump", name, "--out", path(std::string(name) + ".json")}).code, 0) << name;
    std::ofstream(path("garbage.json")) << "{\"kind\": \"real-polynomial\", \"terms\": [{\"i\": 1}]}";
    std::ofstream(path("broken.json")) << "not json at all";
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static inline fs::path dir_;
};

}  // namespace

TEST_F(Cli, CertifyMotzkinWithReznick) {
  const auto r = run({"certify", path("motzkin.json"), "--method", "reznick", "--b-max", "2", "--out", path("cert.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["certificate"]["level"], 1);
  EXPECT_EQ(run({"verify", path("cert.json"), path("motzkin.json")}).code, 0);
}

TEST_F(Cli, MotzkinIsNotSos) {
  EXPECT_EQ(run({"certify", path("motzkin.json"), "--method", "sos"}).code, 1);
}

TEST_F(Cli, MalformedInputIsAnError) {
  EXPECT_EQ(run({"certify", path("garbage.json")}).code, 2);
  EXPECT_EQ(run({"certify", path("broken.json")}).code, 2);
  EXPECT_EQ(run({"certify", path("missing.json")}).code, 2);
  EXPECT_EQ(run({"certify", path("motzkin.json"), "--method", "magic"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST_F(Cli, VerifyRejectsTamperedCertificates) {
  ASSERT_EQ(run({"certify", path("motzkin.json"), "--b-max", "2", "--out", path("good.json")}).code, 0);
  json c = nonclass::io::parse_file(path("good.json"));
  c["matrices"][0]["re"][0][0] = c["matrices"][0]["re"][0][0].get<double>() - 1e-3;
  nonclass::io::write_file(path("perturbed.json"), c);
  EXPECT_EQ(run({"verify", path("perturbed.json"), path("motzkin.json")}).code, 1);
  // a Motzkin certificate does not match the Robinson polynomial of the same degree
  EXPECT_EQ(run({"verify", path("good.json"), path("robinson.json")}).code, 1);
  // degree mismatch: the level-1 Gram matrix cannot cover a degree-10 polynomial
  nonclass::io::write_file(path("decic.json"), json::parse(R"({"kind":"real-polynomial","terms":[{"i":10,"j":0,"c":1}]})"));
  EXPECT_EQ(run({"verify", path("good.json"), path("decic.json")}).code, 2);
}

TEST_F(Cli, CertifyEmitsCertificatesThatVerify) {
  for (const char* method : {"reznick", "pfr"}) {
    const std::string out = path(std::string("emitted-") + method + ".json");
    nonclass::io::write_file(path("bump.json"), json::parse(
        R"({"kind":"hermitian-polynomial","support":"total","degree":4,"terms":[{"k":0,"l":0,"re":1},{"k":1,"l":1,"re":-1},{"k":2,"l":2,"re":1}]})"));
    const auto r = run({"certify", path("bump.json"), "--method", method, "--b-max", "12", "--out", out});
    ASSERT_EQ(r.code, 0) << method << r.err;
    EXPECT_EQ(run({"verify", out, path("bump.json")}).code, 0) << method;
  }
}

TEST_F(Cli, DetectExamples) {
  EXPECT_EQ(run({"detect", path("vacuum.json"), "--method", "reznick", "--level", "0"}).code, 1);
  const auto one = run({"detect", path("fock-1.json"), "--method", "reznick", "--level", "0", "--degree", "4"});
  ASSERT_EQ(one.code, 0) << one.err;
  const json j = json::parse(one.out);
  EXPECT_LT(j["value"].get<double>(), 0.0);
  EXPECT_EQ(j["normalization"], "gram-trace");
  EXPECT_EQ(run({"detect", path("tura-17.json"), "--method", "pfr", "--level", "40"}).code, 0);
  // a rays value is only a lower bound, so it never reports detection
  const auto rays = run({"detect", path("ghz-3.json"), "--method", "rays", "--rays", "32"});
  EXPECT_EQ(rays.code, 1);
  EXPECT_EQ(json::parse(rays.out)["bound"], "lower");
  EXPECT_LT(json::parse(rays.out)["value"].get<double>(), 0.0);
  EXPECT_EQ(run({"detect", path("ghz-3.json"), "--system", "light"}).code, 2);
  EXPECT_EQ(run({"detect", path("motzkin.json")}).code, 2);
}

TEST_F(Cli, DetectWritesItsResult) {
  ASSERT_EQ(run({"detect", path("fock-1.json"), "--out", path("result.json")}).code, 0);
  const json j = nonclass::io::parse_file(path("result.json"));
  for (const char* key : {"value", "level", "method", "normalization", "witness", "certificate", "status"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST_F(Cli, MapGhzWitness) {
  const auto r = run({"map", path("ghz-witness-3.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto w = nonclass::io::polynomial_from_json(json::parse(r.out)["light_witness"]);
  EXPECT_EQ(w.coeff(0, 3), nonclass::cplx(-0.5));
  EXPECT_EQ(w.coeff(1, 1), nonclass::cplx(1.5));
}

TEST_F(Cli, HiddenMotzkin) {
  const auto r = run({"hidden", "motzkin", "--n-max", "10", "--d-tilde", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(json::parse(r.out)["value"].get<double>(), -0.17);
  EXPECT_EQ(run({"hidden", "motzkin", "--n-max", "3"}).code, 1);
}

TEST_F(Cli, Catalog) {
  const auto r = run({"catalog", "list"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("motzkin"), std::string::npos);
  EXPECT_EQ(run({"catalog", "dump", "nonexistent"}).code, 2);
}

TEST_F(Cli, ReproduceRejectsUnknownFigure) {
  EXPECT_EQ(run({"reproduce", "fig99"}).code, 2);
}

TEST_F(Cli, ConfigFileIsOverriddenByFlags) {
  std::ofstream(path("run.ini")) << "[certify]\nmethod=sos\n";
  EXPECT_EQ(run({"--config", path("run.ini"), "certify", path("motzkin.json")}).code, 1);
  EXPECT_EQ(run({"--config", path("run.ini"), "certify", path("motzkin.json"), "--method", "reznick"}).code, 0);
}

TEST_F(Cli, Deterministic) {
  const auto a = run({"detect", path("fock-1.json")}), b = run({"detect", path("fock-1.json")});
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = NONCLASS_BINARY;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("certify " + path("motzkin.json") + " --b-max 2"), 0);
  EXPECT_EQ(status("certify " + path("motzkin.json") + " --method sos"), 1);
  EXPECT_EQ(status("certify " + path("garbage.json")), 2);
  EXPECT_EQ(status("--help"), 0);
}
