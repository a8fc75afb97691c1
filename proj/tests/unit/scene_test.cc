// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "mave/scene.h"
#include "support/checks.h"
#include "support/temp_dir.h"

using mave::ErrorCode;
using mave::GenConfig;
using mave::test::CodeOf;

namespace {

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

GenConfig Small() {
  GenConfig c;
  c.n_scenes = 2;
  c.seed = 11;
  c.synthetic_speakers = 5;
  c.synthetic_utterances = 2;
  c.synthetic_duration_s = 2.0;
  c.t60_range = {0.2, 0.4};
  return c;
}

}  // namespace

TEST_CASE("config text parses with comments and round trips") {
  const auto c = mave::ParseGenConfig(
      "# experiment\n"
      "n_scenes = 5\n"
      "snr_grid = [-5, 0]   # two buckets\n"
      "rooms = [[7, 8, 3]]\n"
      "interferers = 2\n"
      "corpus_dir = \"/data/a#b\"\n"
      "seed = 99\n");
  CHECK(c.n_scenes == 5);
  CHECK(c.snr_grid == std::vector<double>{-5.0, 0.0});
  CHECK(c.rooms.size() == 1);
  CHECK(c.interferers == std::pair<int, int>{2, 2});
  CHECK(c.corpus_dir == "/data/a#b");
  CHECK(c.seed == 99);
  CHECK(mave::ParseGenConfig(mave::GenConfigToText(c)) == c);
  CHECK(mave::ParseGenConfig(mave::GenConfigToText(GenConfig{})) == GenConfig{});
}

TEST_CASE("config errors") {
  CHECK(CodeOf([] { mave::ParseGenConfig("colour = 3\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { mave::ParseGenConfig("seed 3\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { mave::ParseGenConfig("snr_grid = [\n"); }) == ErrorCode::kInvalidArgument);
  GenConfig c;
  c.snr_grid.clear();
  CHECK(CodeOf([&] { c.Validate(); }) == ErrorCode::kInvalidArgument);
  c = GenConfig{};
  c.interferers = {3, 1};
  CHECK(CodeOf([&] { c.Validate(); }) == ErrorCode::kInvalidArgument);
  c = GenConfig{};
  c.solo_s = 0.2;
  CHECK(CodeOf([&] { c.Validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("config hash tracks content") {
  GenConfig a, b;
  CHECK(mave::GenConfigHash(a) == mave::GenConfigHash(b));
  b.seed = 1;
  CHECK(mave::GenConfigHash(a) != mave::GenConfigHash(b));
}

TEST_CASE("scene ids and seeds") {
  CHECK(mave::SceneId(3) == "scene_00003");
  CHECK(mave::SceneSeed(7, 0) == mave::SceneSeed(7, 0));
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < 100; ++i) seen.insert(mave::SceneSeed(7, i));
  CHECK(seen.size() == 100);
  CHECK(mave::SceneSeed(7, 0) != mave::SceneSeed(8, 0));
}

TEST_CASE("synthetic corpus is deterministic and speech-level") {
  const auto corpus = mave::Corpus::Synthetic(3, 2, 1.5, 5);
  CHECK(corpus.speakers().size() == 3);
  CHECK(corpus.size() == 6);
  const auto& u = corpus.speakers().begin()->second.front();
  const auto a = mave::LoadUtterance(u.path);
  const auto b = mave::LoadUtterance(u.path);
  CHECK(a == b);
  CHECK(a.channels() == 1);
  CHECK(a.frames() == 24000);
  const double rms = std::sqrt(mave::Energy(a.channel(0)) / a.frames());
  CHECK(rms == doctest::Approx(0.05).epsilon(1e-9));
  CHECK_FALSE(mave::SyntheticUtterance(5, 0, 0, 1.5) == mave::SyntheticUtterance(5, 1, 0, 1.5));
}

TEST_CASE("directory corpus groups by speaker") {
  mave::test::TempDir dir;
  for (const char* spk : {"bob", "ann"}) {
    std::filesystem::create_directories(dir.path() / spk);
    for (int i = 0; i < 2; ++i)
      mave::WriteWav(mave::SyntheticUtterance(1, i, 0, 0.5),
                     dir.path() / spk / ("u" + std::to_string(i) + ".wav"));
  }
  std::ofstream(dir.path() / "ann" / "notes.txt") << "x";
  const auto corpus = mave::Corpus::FromDirectory(dir.path());
  CHECK(corpus.size() == 4);
  CHECK(corpus.speakers().begin()->first == "ann");
  CHECK(corpus.speakers().at("ann")[0].path < corpus.speakers().at("ann")[1].path);
  CHECK(CodeOf([&] { mave::Corpus::FromDirectory(dir.path() / "none"); }).has_value());
}

TEST_CASE("sampled scenes respect the placement constraints") {
  const GenConfig c = Small();
  const auto corpus = mave::Corpus::ForConfig(c);
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto m = mave::SampleScene(c, corpus, s, "x");
    const auto dims = m.room.dimensions;
    CHECK(m.room.t60 >= 0.2);
    CHECK(m.room.t60 <= 0.4);
    CHECK(std::find(c.snr_grid.begin(), c.snr_grid.end(), m.snr_db) != c.snr_grid.end());
    CHECK(m.interferers.size() >= 1);
    CHECK(m.interferers.size() <= 3);
    std::set<std::string> speakers = {m.target.speaker};
    double first = 1e9;
    for (const auto& i : m.interferers) {
      speakers.insert(i.speaker);
      CHECK(i.onset_offset_s >= c.solo_s);
      CHECK(i.onset_offset_s <= c.solo_s + c.max_onset_offset_s + 1.0 / 16000);
      first = std::min(first, i.onset_offset_s);
    }
    CHECK(speakers.size() == m.interferers.size() + 1);
    CHECK(m.solo_segment.first == 0.0);
    CHECK(m.solo_segment.second == first);
    std::vector<mave::Vec3> sources = {m.target.position};
    for (const auto& i : m.interferers) sources.push_back(i.position);
    for (const auto& p : sources) {
      CHECK(m.room.WallClearance(p) >= c.wall_clearance_m - 1e-12);
      for (std::size_t k = 0; k < m.array.size(); ++k)
        CHECK(mave::Distance(p, m.array.AbsoluteMic(k)) >= c.array_clearance_m);
    }
    for (std::size_t k = 0; k < m.array.size(); ++k)
      CHECK(m.room.WallClearance(m.array.AbsoluteMic(k)) >= c.wall_clearance_m - 1e-12);
    CHECK(dims.z == 3.0);
  }
  CHECK(mave::SampleScene(c, corpus, 3, "x") == mave::SampleScene(c, corpus, 3, "x"));
}

TEST_CASE("sampling failures") {
  GenConfig c = Small();
  c.interferers = {3, 3};
  const auto tiny = mave::Corpus::Synthetic(3, 1, 1.0, 0);
  CHECK(CodeOf([&] { mave::SampleScene(c, tiny, 1, "x"); }) == ErrorCode::kCorpusTooSmall);
  c = Small();
  c.rooms = {{1.4, 1.4, 1.4}};
  c.t60_range = {0.2, 0.2};
  CHECK(CodeOf([&] { mave::SampleScene(c, mave::Corpus::ForConfig(c), 1, "x"); }) ==
        ErrorCode::kPlacementFailure);
}

TEST_CASE("manifest JSON round trip") {
  const GenConfig c = Small();
  const auto m = mave::SampleScene(c, mave::Corpus::ForConfig(c), 9, "scene_00009");
  const auto line = mave::ManifestToJson(m);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(mave::ManifestFromJson(line) == m);
  CHECK(CodeOf([] { mave::ManifestFromJson("{\"scene_id\": 3}"); }) ==
        ErrorCode::kMalformedFile);
}

TEST_CASE("rendered scenes decompose exactly and hit the SNR") {
  const GenConfig c = Small();
  const auto m = mave::SampleScene(c, mave::Corpus::ForConfig(c), 21, "x");
  const auto r = mave::RenderScene(m);
  CHECK(r.mixture.channels() == 4);
  CHECK(r.mixture.frames() == 32000 + mave::RirLength(m.room) - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t t = 0; t < r.mixture.frames(); ++t)
      worst = std::max(worst, std::abs(r.mixture.at(k, t) - r.clean_target.at(k, t) -
                                       r.interference.at(k, t) - r.noise.at(k, t)));
  CHECK(worst < 1e-12);
  const double snr = 10.0 * std::log10(mave::Energy(r.clean_target.channel(0)) /
                                       mave::Energy(r.interference.channel(0)));
  CHECK(snr == doctest::Approx(m.snr_db).epsilon(1e-9));
  const double floor = 10.0 * std::log10(mave::Energy(r.noise.channel(0)) /
                                         mave::Energy(r.clean_target.channel(0)));
  CHECK(std::abs(floor - c.noise_floor_db) < 0.5);
  // Nothing but target and noise during the solo segment.
  const auto solo_end = static_cast<std::size_t>(m.solo_segment.second * 16000);
  for (std::size_t t = 0; t < solo_end; ++t) CHECK(r.interference.at(0, t) == 0.0);
  for (const auto& i : r.manifest.interferers) CHECK(i.gain > 0.0);
  CHECK(mave::RenderScene(m).mixture == r.mixture);
}

TEST_CASE("dataset generation writes, reuses and lists scenes") {
  mave::test::TempDir dir;
  const GenConfig c = Small();
  const auto res = mave::GenerateDataset(c, dir.path(), 1);
  CHECK(res.failures.empty());
  const auto scenes = mave::ReadManifestFile(res.manifest_path);
  REQUIRE(scenes.size() == 2);
  CHECK(scenes[0].scene_id == "scene_00000");
  const auto mix = mave::ReadWav(dir.path() / scenes[1].mixture_path);
  CHECK(mix.channels() == 4);
  const auto before = Slurp(res.manifest_path);
  const auto wav = Slurp(dir.path() / scenes[0].mixture_path);
  const auto again = mave::GenerateDataset(c, dir.path(), 1);
  CHECK(Slurp(again.manifest_path) == before);
  CHECK(Slurp(dir.path() / scenes[0].mixture_path) == wav);
  const auto header = before.substr(0, before.find('\n'));
  CHECK(header.find(mave::GenConfigHash(c)) != std::string::npos);
}
