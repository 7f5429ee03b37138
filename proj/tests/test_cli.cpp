#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

#include "sparse_recovery/cli.hpp"
#include "sparse_recovery/direct_search.hpp"
#include "sparse_recovery/experiments.hpp"
#include "sparse_recovery/gradient_recovery.hpp"
#include "sparse_recovery/io.hpp"

using namespace sparse_recovery;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("SPARSE_RECOVER_TEST_TMP");
  auto dir = (env ? fs::path(env) : fs::temp_directory_path() / "sparse_recovery_tests") / "cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string text(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

TEST_CASE("list-scenarios") {
  const auto r = cli({"list-scenarios"});
  CHECK(r.code == 0);
  std::string expect;
  for (auto n : scenario_catalog()) expect += std::string(n) + "\n";
  CHECK(r.out == expect);
}

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  const auto unknown = cli({"list-scenarios", "--bogus"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("usage") != std::string::npos);
  CHECK(cli({"reconstruct", "--input", "x.csv"}).code == 1);
  CHECK(cli({"scenario", "--name", "nope", "--out", scratch("nope").string()}).code == 1);
  CHECK(cli({"measure", "--input", "does-not-exist.csv"}).code == 1);
}

TEST_CASE("mask covering every sample is a usage error") {
  const auto dir = scratch("fullmask");
  write_signal_csv(dir / "x.csv", synth_multitone(single_tone_components(), 16));
  {
    std::ofstream m(dir / "m.csv");
    m << "missing\n";
    for (int n = 0; n < 16; ++n) m << n << '\n';
  }
  const auto r = cli({"reconstruct", "--input", (dir / "x.csv").string(), "--mask",
                      (dir / "m.csv").string(), "--out", (dir / "out").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("mask must leave at least one available sample") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("reconstruct, measure, surface and direct-search") {
  const auto dir = scratch("tools");
  const Signal x = synth_multitone(three_tone_components(), 256);
  const auto mask = make_mask_random(256, 100, RngSeed{3});
  write_signal_csv(dir / "x.csv", zero_fill(x, mask));
  write_signal_csv(dir / "truth.csv", x);
  write_mask_csv(dir / "m.csv", mask);

  auto r = cli({"reconstruct", "--input", (dir / "x.csv").string(), "--mask", (dir / "m.csv").string(),
                "--truth", (dir / "truth.csv").string(), "--out", (dir / "rec").string(),
                "--max-iters", "2000"});
  CHECK(r.code == 0);
  // Same result as the library call with the same defaults.
  GradientParams g;
  g.max_iterations = 2000;
  const auto lib = reconstruct_adaptive(zero_fill(x, mask), mask, g);
  CHECK(read_signal_csv(dir / "rec" / "signal_reconstructed.csv") == lib.signal);
  CHECK(fs::file_size(dir / "rec" / "trace.csv") > 0);
  const auto report = read_report(dir / "rec" / "report.json");
  CHECK(report.summary.at("final_mae").get<double>() < 1e-10);

  r = cli({"reconstruct", "--input", (dir / "x.csv").string(), "--mask", (dir / "m.csv").string(),
           "--out", (dir / "sched").string(), "--mode", "scheduled", "--schedule",
           R"([{"p":0.9,"delta":1,"mu":10,"iterations":5},{"p":1,"delta":1,"mu":2,"iterations":5}])"});
  CHECK(r.code == 0);
  r = cli({"reconstruct", "--input", (dir / "x.csv").string(), "--mask", (dir / "m.csv").string(),
           "--out", (dir / "bad").string(), "--mode", "scheduled", "--schedule", "[{\"p\":1}]"});
  CHECK(r.code == 1);
  r = cli({"reconstruct", "--input", (dir / "x.csv").string(), "--mask", (dir / "m.csv").string(),
           "--out", (dir / "diverge").string(), "--mode", "fixed", "--mu", "1e308", "--max-iters", "20"});
  CHECK(r.code == 2);

  r = cli({"measure", "--input", (dir / "truth.csv").string(), "--kind", "norm0", "--threshold", "1e-6"});
  CHECK(r.code == 0);
  CHECK(r.out == "6\n");
  r = cli({"measure", "--input", (dir / "truth.csv").string(), "--p", "0"});
  CHECK(r.code == 1);

  const AvailabilityMask two(256, {5, 80});
  write_mask_csv(dir / "two.csv", two);
  write_signal_csv(dir / "x2.csv", zero_fill(x, two));
  r = cli({"surface", "--input", (dir / "x2.csv").string(), "--mask", (dir / "two.csv").string(),
           "--out", (dir / "surf").string(), "--step", "0.05"});
  CHECK(r.code == 0);
  CHECK(read_surface_csv(dir / "surf" / "surface.csv").size() == 201);

  r = cli({"direct-search", "--input", (dir / "x2.csv").string(), "--mask", (dir / "two.csv").string(),
           "--out", (dir / "ds").string(), "--rounds", "12"});
  CHECK(r.code == 0);
  // Twelve halvings of the step from 2.5.
  const Signal filled = read_signal_csv(dir / "ds" / "signal_reconstructed.csv");
  const double last_step = 2.5 / 2048.0;
  CHECK(std::abs(filled[5] - x[5]) <= last_step);
  CHECK(std::abs(filled[80] - x[80]) <= last_step);
  r = cli({"direct-search", "--input", (dir / "x.csv").string(), "--mask", (dir / "m.csv").string(),
           "--out", (dir / "ds2").string()});
  CHECK(r.code == 2);  // 5^100 grid exceeds the budget
}

TEST_CASE("scenario twice gives identical trace bytes and stays inside --out") {
  const auto root = scratch("scenario");
  const auto before = std::distance(fs::directory_iterator(root), fs::directory_iterator());
  CHECK(before == 0);
  for (const char* d : {"a", "b"}) {
    const auto r = cli({"scenario", "--name", "adaptive", "--seed", "7", "--out", (root / d).string()});
    CHECK(r.code == 0);
  }
  CHECK(slurp(root / "a" / "trace.csv") == slurp(root / "b" / "trace.csv"));
  CHECK(slurp(root / "a" / "report.json") == slurp(root / "b" / "report.json"));
  CHECK(std::distance(fs::directory_iterator(root), fs::directory_iterator()) == 2);
  const auto report = read_report(root / "a" / "report.json");
  CHECK(report.config.at("seed").get<std::uint64_t>() == 7);
}

TEST_CASE("help text shows the module defaults") {
  const auto manifest = cli_default_manifest();
  // The manifest itself mirrors the module structs.
  CHECK(manifest.at("reconstruct").at("--delta") == text(GradientParams{}.delta));
  CHECK(manifest.at("reconstruct").at("--P") == text(GradientParams{}.reduction_threshold));
  CHECK(manifest.at("reconstruct").at("--target-delta") == text(GradientParams{}.target_delta));
  CHECK(manifest.at("direct-search").at("--budget") == std::to_string(kDefaultEvaluationBudget));
  CHECK(manifest.at("direct-search").at("--shrink") == "cell");
  CHECK(manifest.at("measure").at("--threshold") == text(MeasureSpec{}.zero_threshold));

  for (const auto& [sub, flags] : manifest) {
    CAPTURE(sub);
    const auto help = cli({sub, "--help"});
    CHECK(help.code == 0);
    for (const auto& [flag, value] : flags) {
      CAPTURE(flag);
      // "  --flag TYPE [default] ..." as printed by the parser.
      const std::regex line("\\n\\s+" + flag + "\\s+[A-Z]+(:\\{[^}]*\\})?\\s+\\[([^\\]]*)\\]");
      std::smatch m;
      REQUIRE(std::regex_search(help.out, m, line));
      CHECK(m[2].str() == value);
    }
  }
}
