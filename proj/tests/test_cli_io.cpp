#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kgframe/cli_io.hpp"
#include "oracles.hpp"

using namespace kgf;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = KGFRAME_FIXTURE_DIR;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& argv) {
  std::ostringstream out, err;
  const int code = run_command(argv, out, err);
  return {code, out.str(), err.str()};
}

/// Runs with the fixture directory as working directory so argv echoes stay relative.
Run run_in_fixtures(const std::vector<std::string>& argv) {
  const fs::path old = fs::current_path();
  fs::current_path(kFixtures);
  Run r = run(argv);
  fs::current_path(old);
  return r;
}

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / ("kgframe_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

ModuleVector vector_from_json(const Json& j, int d) {
  std::vector<AlgebraElement> blocks;
  for (const auto& b : j) {
    CMatrix m(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) m(r, c) = Complex(b[r][c][0].get<double>(), b[r][c][1].get<double>());
    }
    blocks.emplace_back(m);
  }
  return ModuleVector(blocks);
}

}  // namespace

TEST_CASE("spec round trips") {
  FrameSpecFile spec;
  spec.algebra_dim = 1;
  spec.module_rank = 1;
  spec.operators = {ModuleOperator::identity(1, 1)};
  const std::string once = dump_spec(spec);
  const FrameSpecFile back = spec_from_json(Json::parse(once));
  CHECK(dump_spec(back) == once);
  CHECK_FALSE(back.target_operator.has_value());
  CHECK(oracle::max_abs(back.target_or_identity().flat() - CMatrix::Identity(1, 1)) == 0.0);

  const fs::path dir = scratch_dir();
  for (const char* kind : {"tight", "known-bounds", "bessel-only", "perturbed", "dual"}) {
    const auto gen = generate_instance(kind, 2, 2, 3, 17);
    save_spec(gen, dir / "a.json");
    const auto loaded = load_spec(dir / "a.json");
    save_spec(loaded, dir / "b.json");
    CHECK(read_file(dir / "a.json") == read_file(dir / "b.json"));
    CHECK(loaded.kind == kind);
    CHECK(oracle::max_abs(loaded.operators[0].flat() - gen.operators[0].flat()) == 0.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("parse errors name the offending field") {
  try {
    load_spec(kFixtures / "bad_arity.json");
    FAIL("expected a parse error");
  } catch (const FrameError& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("operators[1].blocks[1][0][0][0]") != std::string::npos);
  }

  const Json good = to_json(generate_instance("known-bounds", 2, 2, 2, 3));
  struct Case {
    std::string pointer;
    Json value;
    std::string expected;
  };
  const std::vector<Case> cases = {
      {"/operators/0/blocks/0/1/1/0", Json::array({1.0}), "operators[0].blocks[0][1][1][0]"},
      {"/operators/1/blocks/1/0/0/1", "x", "operators[1].blocks[1][0][0][1]"},
      {"/operators/0/blocks/1/0", Json::array({Json::array({Json::array({1.0, 0.0})})}), "operators[0].blocks[1][0]"},
      {"/operators/0/target_rank", 0, "operators[0].target_rank"},
      {"/target_operator/target_rank", 1, "target_operator.target_rank"},
      {"/bounds/lower/0/0", Json::array({1.0, 2.0, 3.0}), "bounds.lower[0][0]"},
      {"/bounds/mode", "matrix", "bounds.mode"},
      {"/algebra_dim", -1, "algebra_dim"},
      {"/operators", Json::array(), "operators"},
  };
  for (const auto& c : cases) {
    Json bad = good;
    bad[Json::json_pointer(c.pointer)] = c.value;
    try {
      spec_from_json(bad);
      FAIL("expected a parse error for " << c.pointer);
    } catch (const FrameError& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      CHECK_MESSAGE(std::string(e.what()).find(c.expected) != std::string::npos, e.what());
    }
  }
  Json missing = good;
  missing.erase("operators");
  CHECK_THROWS_AS(spec_from_json(missing), FrameError);
  CHECK_THROWS_AS(load_spec(kFixtures / "does_not_exist.json"), FrameError);
}

TEST_CASE("generated instances") {
  CHECK(dump_spec(generate_instance("dual", 2, 2, 3, 5)) == dump_spec(generate_instance("dual", 2, 2, 3, 5)));
  CHECK(dump_spec(generate_instance("dual", 2, 2, 3, 5)) != dump_spec(generate_instance("dual", 2, 2, 3, 6)));

  auto tight = generate_instance("tight", 1, 3, 2, 9);
  CHECK(oracle::max_abs(frame_operator(tight.family()).flat() - CMatrix::Identity(3, 3)) < 1e-12);
  tight = generate_instance("tight", 2, 2, 2, 9);
  CHECK(certify(tight.family(), tight.target_or_identity(), *tight.bounds).verdict == Verdict::Certified);

  CertConfig exact;
  exact.mode = CertMode::Exact;
  for (int seed = 0; seed < 10; ++seed) {
    const auto kb = generate_instance("known-bounds", 1 + seed % 3, 1 + seed % 4, 1 + seed % 3, seed);
    CHECK(certify(kb.family(), kb.target_or_identity(), *kb.bounds, exact).verdict == Verdict::Certified);

    const auto bo = generate_instance("bessel-only", 1 + seed % 3, 1 + seed % 3, 2, seed);
    // The lower gap is -a^2 in the dropped direction, so a^2 must clear the tolerance.
    for (const double a : {1e-3, 1e-2, 1.0}) {
      const auto cert = certify(bo.family(), bo.target_or_identity(),
                                FrameBounds::scalar(bo.algebra_dim, a, bo.bounds->scalar_upper()), exact);
      CHECK(cert.verdict == Verdict::Falsified);
      CHECK(cert.failed_side == Side::Lower);
    }

    const auto du = generate_instance("dual", 2, 2, 2, seed);
    CHECK(verify_dual(du.family(), OperatorFamily(du.dual_operators), du.target_or_identity()).verified);
  }
  try {
    generate_instance("frobnicate", 1, 1, 1, 1);
    FAIL("expected UnknownKind");
  } catch (const FrameError& e) {
    CHECK(e.kind() == ErrorKind::UnknownKind);
  }
}

TEST_CASE("exit codes from fixtures") {
  CHECK(run_in_fixtures({"verify", "tight_d1.json"}).code == kExitCertified);
  CHECK(run_in_fixtures({"verify", "upper_too_small_d1.json"}).code == kExitFalsified);
  CHECK(run_in_fixtures({"verify", "algebra_bounds_d2.json"}).code == kExitInconclusive);
  CHECK(run_in_fixtures({"verify", "bad_arity.json"}).code == kExitInputError);
  const Run singular = run_in_fixtures({"dual", "singular_d2.json"});
  CHECK(singular.code == kExitHypothesisFailure);
  CHECK(Json::parse(singular.out)["result"]["error"] == "SingularFrameOperator");

  CHECK(run({"verify"}).code == kExitInputError);
  CHECK(run({"verify", (kFixtures / "missing.json").string()}).code == kExitInputError);
  CHECK(run({"frobnicate"}).code == kExitInputError);
  CHECK(run({"verify", (kFixtures / "tight_d1.json").string(), "--mode", "sideways"}).code == kExitInputError);
  CHECK(run({"dual", (kFixtures / "singular_d2.json").string(), "--kind", "provided"}).code == kExitInputError);
  CHECK(run({"--help"}).code == kExitCertified);
}

TEST_CASE("golden reports") {
  for (const char* name : {"tight_d1", "upper_too_small_d1"}) {
    const Run r = run_in_fixtures({"verify", std::string(name) + ".json"});
    CHECK(r.out == read_file(kFixtures / (std::string(name) + ".verify.golden.json")));
  }
}

TEST_CASE("reports are deterministic for a fixed seed") {
  const auto a = run_in_fixtures({"verify", "algebra_bounds_d2.json", "--samples", "200", "--seed", "4"});
  const auto b = run_in_fixtures({"verify", "algebra_bounds_d2.json", "--samples", "200", "--seed", "4"});
  CHECK(a.out == b.out);
  CHECK(Json::parse(a.out)["seed"] == 4);
  CHECK(Json::parse(a.out)["result"]["certificate"]["mode"] == "sampled");

  const fs::path dir = scratch_dir();
  const std::string spec = (dir / "p.json").string();
  REQUIRE(run({"gen", "--kind", "perturbed", "--d", "2", "--n", "2", "--count", "3", "--seed", "11", "--out", spec})
              .code == kExitCertified);
  const auto p1 = run({"perturb", spec, "--samples", "100"});
  const auto p2 = run({"perturb", spec, "--samples", "100"});
  CHECK(p1.code == kExitCertified);
  CHECK(p1.out == p2.out);
  CHECK(run({"douglas", spec}).code == kExitCertified);
  CHECK(run({"bounds", spec}).code == kExitCertified);
  CHECK(run({"dual", spec, "--kind", "minimal"}).code == kExitCertified);

  const std::string dual_spec = (dir / "d.json").string();
  REQUIRE(run({"gen", "--kind", "dual", "--d", "1", "--n", "2", "--count", "2", "--seed", "3", "--out", dual_spec}).code ==
          kExitCertified);
  CHECK(run({"dual", dual_spec, "--kind", "provided"}).code == kExitCertified);
  const auto t = run({"tensor", dual_spec, spec, (kFixtures / "tight_d1.json").string()});
  CHECK(t.code == kExitCertified);
  CHECK(Json::parse(t.out)["result"]["composite_dim"] == 2);
  CHECK(Json::parse(t.out)["result"]["member_count"] == 2 * 3 * 2);

  const std::string report = (dir / "r.txt").string();
  CHECK(run({"verify", (kFixtures / "tight_d1.json").string(), "--format", "text", "--out", report}).code ==
        kExitCertified);
  CHECK(read_file(report).find("exit_code: 0") != std::string::npos);
  CHECK(Json::parse(run({"verify", (kFixtures / "tight_d1.json").string(), "--timing"}).out).contains("timing_ms"));
  fs::remove_all(dir);
}

TEST_CASE("seed precedence") {
  const std::string tight = (kFixtures / "tight_d1.json").string();
  ::unsetenv(kSeedEnv);
  CHECK(Json::parse(run({"verify", tight}).out)["seed"] == kDefaultSeed);
  ::setenv(kSeedEnv, "77", 1);
  CHECK(Json::parse(run({"verify", tight}).out)["seed"] == 77);
  CHECK(Json::parse(run({"verify", tight, "--seed", "5"}).out)["seed"] == 5);
  ::setenv(kSeedEnv, "not-a-number", 1);
  CHECK(run({"verify", tight}).code == kExitInputError);
  ::unsetenv(kSeedEnv);

  const std::string a = run({"gen", "--kind", "tight", "--seed", "8"}).out;
  CHECK(a == run({"gen", "--kind", "tight", "--seed", "8"}).out);
  CHECK(Json::parse(a)["seed"] == 8);
}

TEST_CASE("falsification witnesses re-evaluate standalone") {
  const fs::path dir = scratch_dir();
  for (int seed = 0; seed < 5; ++seed) {
    const std::string spec_path = (dir / "b.json").string();
    REQUIRE(run({"gen", "--kind", "bessel-only", "--d", "2", "--n", "2", "--count", "2", "--seed",
                 std::to_string(seed), "--out", spec_path})
                .code == kExitCertified);
    for (const char* mode : {"exact", "sampled"}) {
      const Run r = run({"verify", spec_path, "--mode", mode, "--samples", "300"});
      REQUIRE(r.code == kExitFalsified);
      const Json cert = Json::parse(r.out)["result"]["certificate"];
      const FrameSpecFile spec = load_spec(spec_path);
      const auto x = vector_from_json(cert["witness"], spec.algebra_dim);
      const GapPair gap = gap_at(spec.family(), spec.target_or_identity(), *spec.bounds, x);
      const double tol = kDefaultTol;
      CHECK(is_positive(gap.lower).min_eigenvalue < -tol);
      CHECK(cert["failed_side"] == "lower");
      if (std::string(mode) == "sampled") {
        CHECK(is_positive(gap.lower).min_eigenvalue ==
              doctest::Approx(cert["min_gap_lower"].get<double>()).epsilon(2 * tol).scale(1.0));
      }
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("tolerance precedence") {
  auto spec = load_spec(kFixtures / "upper_too_small_d1.json");
  spec.tolerance = 10.0;
  const fs::path dir = scratch_dir();
  const std::string path = (dir / "loose.json").string();
  save_spec(spec, path);
  CHECK(run({"verify", path}).code == kExitCertified);
  CHECK(run({"verify", path, "--tol", "1e-9"}).code == kExitFalsified);
  fs::remove_all(dir);
}
