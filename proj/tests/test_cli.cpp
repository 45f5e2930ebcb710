#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// End-to-end checks of the installed command-line surface. Each case shells
// out to the built binary.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef EERKIT_CLI_PATH
#error "EERKIT_CLI_PATH must point at the built binary"
#endif

const std::string kCli = EERKIT_CLI_PATH;

struct CommandResult {
  int status = -1;
  std::string out;
};

CommandResult run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult r;
  std::array<char, 4096> buf;
  while (std::size_t got = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), got);
  const int rc = pclose(pipe);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "eerkit_cli_test";
  fs::create_directories(dir);
  return dir;
}

double csv_field(const std::string& text, std::size_t row, std::size_t col) {
  std::stringstream ss(text);
  std::string line;
  for (std::size_t r = 0; r <= row; ++r) REQUIRE(std::getline(ss, line));
  std::stringstream ls(line);
  std::string cell;
  for (std::size_t c = 0; c <= col; ++c) REQUIRE(std::getline(ls, cell, ','));
  return std::stod(cell);
}

}  // namespace

TEST_CASE("generate then icc-check recovers the target") {
  const auto dir = work_dir();
  const auto fmx = (dir / "m.fmx").string();
  CHECK(run("generate --subjects 1000 --features 50 --icc 0.7 --seed 1 --out " + fmx).status == 0);
  const CommandResult icc = run("icc-check " + fmx);
  REQUIRE(icc.status == 0);
  const double mean_icc = csv_field(icc.out, 1, 1);
  CHECK(mean_icc > 0.67);
  CHECK(mean_icc < 0.73);
}

TEST_CASE("eer methods agree through the CLI") {
  const auto dir = work_dir();
  const auto fmx = (dir / "m.fmx").string();
  REQUIRE(run("generate --subjects 1000 --features 50 --icc 0.7 --seed 1 --out " + fmx).status ==
          0);
  const CommandResult exact =
      run("eer " + fmx + " --features 10 --seed 3 --method exact");
  const CommandResult bin =
      run("eer " + fmx + " --features 10 --seed 3 --method binsearch");
  REQUIRE(exact.status == 0);
  REQUIRE(bin.status == 0);
  const double e1 = csv_field(exact.out, 1, 0);
  const double e2 = csv_field(bin.out, 1, 0);
  CHECK(std::fabs(e1 - e2) <= 0.05);  // percentage points
}

TEST_CASE("ttest reproduces a published row") {
  const CommandResult r =
      run("ttest --mean1 17.360 --sd1 0.726 --n1 158 --mean2 17.320 --sd2 0.473 --n2 68");
  REQUIRE(r.status == 0);
  CHECK(std::fabs(csv_field(r.out, 1, 0) - 0.483) <= 0.1);
  CHECK(std::fabs(csv_field(r.out, 1, 1) - 189.0) <= 2.0);
  CHECK(std::fabs(csv_field(r.out, 1, 2) - 0.629) <= 0.02);
}

TEST_CASE("exit codes distinguish usage from data errors") {
  CHECK(run("no-such-command").status == 1);
  CHECK(run("generate --subjects 10").status == 1);  // missing required flags
  const auto dir = work_dir();
  CHECK(run("icc-check " + (dir / "missing.fmx").string()).status == 2);
  CHECK(run("generate --subjects 10 --features 2 --icc 0 --seed 1 --out " +
            (dir / "x.fmx").string())
            .status == 2);  // icc outside (0,1]
  CHECK(run("--help").status == 0);
}

TEST_CASE("exp2 runs from a config file and plot renders the figure") {
  const auto dir = work_dir();
  const auto cfg_path = dir / "exp2.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "seed=3\n"
        << "bands=5\n"
        << "features=3\n"
        << "subject_counts=100,300\n"
        << "baseline_runs=4\n"
        << "min_runs=3\n"
        << "max_runs=10\n"
        << "source_subjects=600\n"
        << "source_features=5\n";
  }
  const auto out_dir = dir / "exp2_out";
  REQUIRE(run("exp2 --config " + cfg_path.string() + " --out " + out_dir.string()).status == 0);
  CHECK(fs::exists(out_dir / "runs.csv"));
  CHECK(fs::exists(out_dir / "summary.csv"));
  CHECK(fs::exists(out_dir / "tests.csv"));

  const auto svg = dir / "fig3.svg";
  REQUIRE(run("plot --in " + (out_dir / "fig3.csv").string() + " --x band --y mean_eer" +
              " --series n_subjects --out " + svg.string())
              .status == 0);
  std::ifstream in(svg);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
}

TEST_CASE("pca fit and apply round through files") {
  const auto dir = work_dir();
  const auto fmx = (dir / "p.fmx").string();
  const auto model = (dir / "p.pca").string();
  const auto comps = (dir / "c.fmx").string();
  REQUIRE(run("generate --subjects 300 --features 20 --icc 0.8 --seed 9 --out " + fmx).status ==
          0);
  REQUIRE(run("pca-fit --in " + fmx + " --train-rows 100 --components 5 --out " + model).status ==
          0);
  REQUIRE(run("pca-apply --model " + model + " --in " + fmx + " --out " + comps +
              " --skip-train 100 --zscore")
              .status == 0);
  const CommandResult eer = run("eer " + comps + " --method exact");
  CHECK(eer.status == 0);
}
