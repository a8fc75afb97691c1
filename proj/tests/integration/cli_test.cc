// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "mave/metrics.h"
#include "support/temp_dir.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string output;  // stdout and stderr
};

Run Mave(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + " '" MAVE_CLI "' " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path WriteConfig(const fs::path& dir) {
  const auto path = dir / "small.cfg";
  std::ofstream(path) << "# two short scenes\n"
                         "n_scenes = 2\n"
                         "t60_range = [0.2, 0.3]\n"
                         "synthetic_speakers = 4\n"
                         "synthetic_utterances = 1\n"
                         "synthetic_duration_s = 2.0\n"
                         "seed = 5\n";
  return path;
}

}  // namespace

TEST_CASE("version and usage errors") {
  const auto v = Mave("--version");
  CHECK(v.status == 0);
  CHECK(v.output.find("0.1.0") != std::string::npos);
  CHECK(Mave("").status != 0);
  CHECK(Mave("generate").status != 0);  // --out is required
}

TEST_CASE("stages report missing inputs and bad enhancers") {
  mave::test::TempDir dir;
  const auto out = (dir.path() / "empty").string();
  const auto r = Mave("enhance --out " + out + " --enhancer oracle-cirm");
  CHECK(r.status == 2);
  CHECK(r.output.find("MissingStage") != std::string::npos);
  CHECK(r.output.find("generate") != std::string::npos);
  const auto bad = Mave("enhance --out " + out + " --enhancer wiener");
  CHECK(bad.status == 2);
  CHECK(bad.output.find("InvalidArgument") != std::string::npos);
}

TEST_CASE("run produces every artifact and is reproducible") {
  mave::test::TempDir dir;
  const auto cfg = WriteConfig(dir.path()).string();
  const auto out = dir.path() / "a";
  const std::string args = "run --config " + cfg + " --out " + out.string() +
                           " --enhancer oracle-cirm --enhancer oracle-irm --domain both";
  const auto r = Mave(args, "MAVE_PESQ_BIN=");
  INFO(r.output);
  REQUIRE(r.status == 0);
  for (const char* p : {"manifest.jsonl", "metrics.csv", "report.md", "run-run.json",
                        "scenes/scene_00001/mixture.wav", "enhanced/oracle-irm/scene_00000.wav",
                        "binaural/oracle-cirm/scene_00001.wav"})
    CHECK(fs::exists(out / p));
  const auto rows = mave::MetricsFromCsv(Slurp(out / "metrics.csv"));
  CHECK(rows.size() == 12);
  const auto report = Slurp(out / "report.md");
  CHECK(report.find("OracleIRM") != std::string::npos);
  CHECK(report.find("Overall") != std::string::npos);

  // A second run reuses everything and rewrites identical results.
  const auto csv = Slurp(out / "metrics.csv");
  const auto again = Mave(args, "MAVE_PESQ_BIN=");
  CHECK(again.status == 0);
  CHECK(again.output.find("0 processed, 2 skipped") != std::string::npos);
  CHECK(Slurp(out / "metrics.csv") == csv);

  // A fresh directory with more workers gives the same bytes.
  const auto other = dir.path() / "b";
  const auto par = Mave("run --config " + cfg + " --out " + other.string() +
                            " --workers 3 --enhancer oracle-cirm --enhancer oracle-irm --domain both",
                        "MAVE_PESQ_BIN=");
  CHECK(par.status == 0);
  for (const char* p : {"manifest.jsonl", "metrics.csv", "scenes/scene_00000/mixture.wav",
                        "binaural/noisy/scene_00001.wav"})
    CHECK(Slurp(out / p) == Slurp(other / p));
}

TEST_CASE("stage-wise invocation with PESQ through the adapter") {
  mave::test::TempDir dir;
  const auto cfg = WriteConfig(dir.path()).string();
  const auto out = (dir.path() / "d").string();
  REQUIRE(Mave("generate --config " + cfg + " --n-scenes 1 --out " + out).status == 0);
  REQUIRE(Mave("enhance --out " + out + " --enhancer passthrough").status == 0);
  const auto ev = Mave("evaluate --out " + out + " --enhancer passthrough --domain mic",
                       std::string("MAVE_PESQ_BIN='") + MAVE_PESQ_WRAPPER + "'");
  INFO(ev.output);
  REQUIRE(ev.status == 0);
  const auto rows = mave::MetricsFromCsv(Slurp(fs::path(out) / "metrics.csv"));
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    REQUIRE(r.pesq.has_value());
    CHECK(*r.pesq >= -0.5);
    CHECK(*r.pesq <= 4.5);
  }
  // Passthrough output equals the mixture, so the scores agree.
  CHECK(rows[0].pesq == doctest::Approx(*rows[1].pesq).epsilon(1e-3));
  const auto md = (dir.path() / "custom.md").string();
  REQUIRE(Mave("report --csv " + out + "/metrics.csv --report " + md).status == 0);
  CHECK(Slurp(md).find("Passthrough") != std::string::npos);
}

TEST_CASE("missing PESQ tool leaves the column empty with a notice") {
  mave::test::TempDir dir;
  const auto cfg = WriteConfig(dir.path()).string();
  const auto out = (dir.path() / "e").string();
  REQUIRE(Mave("generate --config " + cfg + " --n-scenes 1 --out " + out).status == 0);
  const auto ev = Mave("evaluate --out " + out + " --domain mic", "MAVE_PESQ_BIN=");
  CHECK(ev.status == 0);
  CHECK(ev.output.find("MAVE_PESQ_BIN") != std::string::npos);
  const auto rows = mave::MetricsFromCsv(Slurp(fs::path(out) / "metrics.csv"));
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].pesq.has_value());
}
