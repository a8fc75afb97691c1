// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Scene sampling and rendering: a target talker and 1-3 interfering talkers
// in a reverberant shoebox room, captured by a head-worn array.

#ifndef MAVE_SCENE_H_
#define MAVE_SCENE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mave/parallel.h"
#include "mave/room.h"
#include "mave/wave_io.h"

namespace mave {

// Generation settings. The text form is one "key = value" per line, values
// written as JSON ("#" starts a comment):
//
//   n_scenes = 200
//   snr_grid = [-10, -5, 0, 5]
//   t60_range = [0.2, 1.0]
//   rooms = [[7, 8, 3], [10, 8, 3], [12, 9, 3]]
//   solo_s = 0.6
//   interferers = [1, 3]
//   corpus_dir = "/data/speech"   # empty: built-in synthetic corpus
//   seed = 7
struct GenConfig {
  std::size_t n_scenes = 8;
  std::vector<double> snr_grid = {-10.0, -5.0, 0.0, 5.0};
  std::pair<double, double> t60_range = {0.2, 1.0};
  std::vector<Vec3> rooms = {{7, 8, 3}, {10, 8, 3}, {12, 9, 3}};
  double solo_s = 0.6;
  std::pair<int, int> interferers = {1, 3};
  double max_onset_offset_s = 1.0;
  double noise_floor_db = -40.0;
  std::string corpus_dir;
  std::uint64_t seed = 0;
  std::vector<Vec3> mic_positions = DefaultGlassesArray();
  double wall_clearance_m = 0.5;
  double array_clearance_m = 0.8;
  // Synthetic corpus shape, used when corpus_dir is empty.
  std::size_t synthetic_speakers = 8;
  std::size_t synthetic_utterances = 4;
  double synthetic_duration_s = 3.0;

  // Throws InvalidArgument on inconsistent values.
  void Validate() const;
  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

GenConfig ParseGenConfig(const std::string& text);
GenConfig LoadGenConfig(const std::filesystem::path& path);
// Canonical text form; ParseGenConfig(GenConfigToText(c)) == c.
std::string GenConfigToText(const GenConfig& config);
// Hex FNV-1a digest of the canonical text.
std::string GenConfigHash(const GenConfig& config);

struct Utterance {
  std::string speaker;
  // File path, or "synthetic:<corpus seed>/<speaker>/<index>/<seconds>".
  std::string path;
};

// Catalog of utterances grouped by speaker.
class Corpus {
 public:
  // Every "<dir>/<speaker>/<name>.wav" (mono, 16 kHz), sorted by path.
  static Corpus FromDirectory(const std::filesystem::path& dir);
  // Speech-like signals: noise through speaker-specific resonances, shaped
  // by a syllabic 4 Hz envelope.
  static Corpus Synthetic(std::size_t speakers, std::size_t utterances,
                          double duration_s, std::uint64_t seed);
  static Corpus ForConfig(const GenConfig& config);

  const std::map<std::string, std::vector<Utterance>>& speakers() const {
    return speakers_;
  }
  std::size_t size() const;

 private:
  std::map<std::string, std::vector<Utterance>> speakers_;
};

// Reads a file utterance or regenerates a synthetic one. Always mono.
MultichannelWave LoadUtterance(const std::string& path);
MultichannelWave SyntheticUtterance(std::uint64_t corpus_seed,
                                    std::size_t speaker, std::size_t index,
                                    double duration_s);

struct SourceSpec {
  std::string utterance_path;
  std::string speaker;
  Vec3 position;
  double onset_offset_s = 0.0;
  double gain = 1.0;
  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

struct SceneManifest {
  std::string scene_id;
  std::uint64_t seed = 0;
  RoomSpec room;
  ArrayGeometry array;
  SourceSpec target;
  std::vector<SourceSpec> interferers;
  double snr_db = 0.0;
  double noise_floor_db = -40.0;
  std::pair<double, double> solo_segment;  // seconds
  // Relative to the dataset directory.
  std::string mixture_path;
  std::string clean_target_path;
  friend bool operator==(const SceneManifest&, const SceneManifest&) = default;
};

std::string ManifestToJson(const SceneManifest& manifest);
SceneManifest ManifestFromJson(const std::string& line);

// Header line of a manifest file and the parser for a whole file (header
// first, then one scene per line).
std::string ManifestHeader(const GenConfig& config);
std::vector<SceneManifest> ReadManifestFile(const std::filesystem::path& path);

// Random scene for |seed|: room, T60, head pose and positions are drawn
// uniformly; positions are rejection-sampled (PlacementFailure after 1000
// attempts). Interferer gains are left at 1 until rendering.
SceneManifest SampleScene(const GenConfig& config, const Corpus& corpus,
                          std::uint64_t seed, const std::string& scene_id);

struct RenderedScene {
  SceneManifest manifest;  // interferer gains filled in
  MultichannelWave mixture;
  MultichannelWave clean_target;
  MultichannelWave interference;  // scaled
  MultichannelWave noise;
};

// Scene length is the reverberant target length; interferers start at their
// onsets and are cut at that length.
RenderedScene RenderScene(const SceneManifest& manifest);

// Per-scene seed: SplitMix64 of (config seed, scene index).
std::uint64_t SceneSeed(std::uint64_t config_seed, std::size_t index);
std::string SceneId(std::size_t index);

struct DatasetResult {
  std::filesystem::path manifest_path;
  std::vector<SceneFailure> failures;
};

// Samples and renders config.n_scenes scenes into |out_dir| (scenes/<id>/
// mixture.wav, clean.wav, scene.json) and writes manifest.jsonl listing the
// scenes that succeeded. Scenes whose files already exist are reused. Output
// bytes do not depend on |workers|.
DatasetResult GenerateDataset(const GenConfig& config,
                              const std::filesystem::path& out_dir,
                              std::size_t workers = 1);

}  // namespace mave

#endif  // MAVE_SCENE_H_
