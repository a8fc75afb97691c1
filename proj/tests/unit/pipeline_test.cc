// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mave/metrics.h"
#include "mave/pipeline.h"
#include "support/checks.h"
#include "support/temp_dir.h"

using mave::Domain;
using mave::ErrorCode;
using mave::test::CodeOf;
namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

mave::GenConfig Tiny(std::size_t n) {
  mave::GenConfig c;
  c.n_scenes = n;
  c.seed = 3;
  c.synthetic_speakers = 4;
  c.synthetic_utterances = 1;
  c.synthetic_duration_s = 2.0;
  c.t60_range = {0.2, 0.3};
  c.interferers = {1, 1};
  return c;
}

}  // namespace

TEST_CASE("domain and enhancer parsing") {
  CHECK(mave::ParseDomain("mic") == Domain::kMicrophone);
  CHECK(mave::ParseDomain("binaural") == Domain::kBinaural);
  CHECK(mave::ParseDomain("both") == Domain::kBoth);
  CHECK(CodeOf([] { mave::ParseDomain("ears"); }) == ErrorCode::kInvalidArgument);
  CHECK(mave::EnhancerKey(mave::ParseEnhancer("oracle-cirm")) == "oracle-cirm");
  CHECK(mave::EnhancerKey(mave::ParseEnhancer("oracle-irm")) == "oracle-irm");
  CHECK(mave::EnhancerKey(mave::ParseEnhancer("passthrough")) == "passthrough");
  const auto ext = mave::ParseEnhancer("external:/masks");
  CHECK(mave::EnhancerKey(ext) == "external");
  CHECK(std::get<mave::provider::ExternalFile>(ext).path == "/masks");
  CHECK(CodeOf([] { mave::ParseEnhancer("wiener"); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { mave::ParseEnhancer("external:"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("stages refuse to run before their inputs exist") {
  mave::test::TempDir dir;
  CHECK(CodeOf([&] { mave::CmdEnhance(dir.path(), mave::provider::OracleCirm{}, 1); }) ==
        ErrorCode::kMissingStage);
  CHECK(CodeOf([&] { mave::CmdRender(dir.path(), "noisy", 1); }) == ErrorCode::kMissingStage);
  CHECK(CodeOf([&] { mave::CmdEvaluate(dir.path(), {}, Domain::kMicrophone, 1); }) ==
        ErrorCode::kMissingStage);
  CHECK(CodeOf([&] { mave::CmdReport(dir.path() / "metrics.csv", dir.path() / "r.md"); }) ==
        ErrorCode::kMissingStage);
}

TEST_CASE("full pipeline on two scenes") {
  mave::test::TempDir dir;
  const auto out = dir.path();
  CHECK(mave::CmdGenerate(Tiny(2), out, 1).ok());

  auto enh = mave::CmdEnhance(out, mave::provider::OracleCirm{}, 2);
  CHECK(enh.ok());
  CHECK(enh.processed == 2);
  CHECK(fs::exists(out / "enhanced/oracle-cirm/scene_00001.wav"));
  const auto log = nlohmann::json::parse(Slurp(out / "enhanced/oracle-cirm/scene_00000.json"));
  CHECK(log.at("sisdr_loss").size() == 4);
  enh = mave::CmdEnhance(out, mave::provider::OracleCirm{}, 1);
  CHECK(enh.skipped == 2);
  CHECK(enh.processed == 0);

  // Rendering an enhancer that never ran fails per scene.
  const auto missing = mave::CmdRender(out, "oracle-irm", 1);
  CHECK(missing.failures.size() == 2);
  for (const char* which : {"clean", "noisy", "oracle-cirm"})
    CHECK(mave::CmdRender(out, which, 1).ok());
  CHECK(mave::ReadWav(out / "binaural/clean/scene_00000.wav").channels() == 2);
  CHECK(fs::exists(out / "cache"));

  CHECK(mave::CmdEvaluate(out, {"oracle-cirm"}, Domain::kBoth, 1).ok());
  const auto rows = mave::MetricsFromCsv(Slurp(out / "metrics.csv"));
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].condition == "Noisy");
  CHECK(rows[0].domain == "microphone");
  CHECK(rows[0].channels == 4);
  CHECK(rows[1].condition == "OracleCIRM");
  CHECK(rows[2].domain == "binaural");
  CHECK(rows[2].channels == 2);
  for (const auto& r : rows) CHECK_FALSE(r.pesq.has_value());
  CHECK(rows[1].si_sdr > rows[0].si_sdr);

  mave::CmdReport(out / "metrics.csv", out / "report.md");
  const auto md = Slurp(out / "report.md");
  CHECK(md.find("OracleCIRM") != std::string::npos);
  CHECK(md.find(mave::GenConfigHash(Tiny(2))) != std::string::npos);
}

TEST_CASE("external masks that are missing fail only their scene") {
  mave::test::TempDir dir;
  const auto out = dir.path() / "data";
  CHECK(mave::CmdGenerate(Tiny(2), out, 1).ok());
  const auto masks = dir.path() / "masks";
  fs::create_directories(masks);
  const auto mix = mave::ReadWav(out / "scenes/scene_00000/mixture.wav");
  mave::MaskSet set;
  for (std::size_t m = 0; m < mix.channels(); ++m) {
    const auto spec = mave::Stft(mix.channel(m));
    set.masks.emplace_back(spec.bins(), spec.frames(), true, mave::Complex(9.0, 0.0));
  }
  mave::WriteMaskSet(set, masks / "scene_00000.mask");
  const auto r = mave::CmdEnhance(out, mave::provider::ExternalFile{masks}, 1);
  CHECK(r.processed == 1);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].scene_id == "scene_00001");
}

TEST_CASE("run metadata records provenance without timestamps") {
  mave::test::TempDir dir;
  CHECK(mave::CmdGenerate(Tiny(1), dir.path(), 1).ok());
  const auto [hash, seed] = mave::DatasetProvenance(dir.path());
  CHECK(hash == mave::GenConfigHash(Tiny(1)));
  CHECK(seed == 3);
  mave::WriteRunMetadata(dir.path(), "generate", hash, seed, {"generate", "--seed", "3"});
  const auto first = Slurp(dir.path() / "run-generate.json");
  mave::WriteRunMetadata(dir.path(), "generate", hash, seed, {"generate", "--seed", "3"});
  CHECK(Slurp(dir.path() / "run-generate.json") == first);
  const auto j = nlohmann::json::parse(first);
  CHECK(j.at("version") == mave::kToolVersion);
  CHECK(j.at("config_hash") == hash);
}
