// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Stage-wise experiment driver. Every stage reads and writes a dataset
// directory:
//
//   manifest.jsonl                   scenes (generate)
//   scenes/<id>/{mixture,clean}.wav
//   enhanced/<enhancer>/<id>.wav     enhance
//   enhanced/<enhancer>/<id>.json    per-channel sisdr_loss
//   binaural/<which>/<id>.wav        render (which: noisy, clean or an
//                                    enhancer name)
//   metrics.csv                      evaluate
//   report.md                        report
//   run-<stage>.json                 run metadata for the last run of a stage
//
// Stages skip scenes whose outputs already exist.

#ifndef MAVE_PIPELINE_H_
#define MAVE_PIPELINE_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mave/binaural.h"
#include "mave/enhance.h"
#include "mave/parallel.h"
#include "mave/scene.h"

namespace mave {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Domain { kMicrophone, kBinaural, kBoth };

// "mic", "binaural" or "both".
Domain ParseDomain(const std::string& text);

// "passthrough", "oracle-cirm", "oracle-irm" or "external:DIR", where DIR
// holds one <scene_id>.mask file per scene.
MaskProvider ParseEnhancer(const std::string& text);
// Directory name under enhanced/ and binaural/: the text form without the
// external path ("external").
std::string EnhancerKey(const MaskProvider& provider);

struct StageResult {
  std::size_t processed = 0;  // scenes computed in this run
  std::size_t skipped = 0;    // scenes whose outputs already existed
  std::vector<SceneFailure> failures;
  bool ok() const { return failures.empty(); }
};

struct BinauralSetup {
  HrtfModel hrtf = RigidSphereHrtf{};
  DirectionGrid grid = DirectionGrid::Default();
  double regularization = 1e-4;
  StftParams params;
};

StageResult CmdGenerate(const GenConfig& config,
                        const std::filesystem::path& out_dir,
                        std::size_t workers);

StageResult CmdEnhance(const std::filesystem::path& out_dir,
                       const MaskProvider& provider, std::size_t workers);

// |which| is "noisy", "clean" or an enhancer key with existing enhanced
// output. Filters are cached under out_dir/cache.
StageResult CmdRender(const std::filesystem::path& out_dir,
                      const std::string& which, std::size_t workers,
                      const BinauralSetup& setup = {});

// Writes metrics.csv with a Noisy row and one row per enhancer for every
// scene and requested domain. Microphone rows compare against the clean
// reverberant target, binaural rows against the rendered clean target;
// both average over channels. PESQ is filled in when the external tool is
// configured.
StageResult CmdEvaluate(const std::filesystem::path& out_dir,
                        const std::vector<std::string>& enhancer_keys,
                        Domain domain, std::size_t workers);

// Aggregates a metrics CSV into report.md beside it (or |report_path|).
void CmdReport(const std::filesystem::path& csv_path,
               const std::filesystem::path& report_path);

// Config hash and seed from the manifest header in |out_dir|.
std::pair<std::string, std::uint64_t> DatasetProvenance(
    const std::filesystem::path& out_dir);

// Records the stage, config hash, seed, tool version and arguments in
// out_dir/run-<stage>.json.
void WriteRunMetadata(const std::filesystem::path& out_dir,
                      const std::string& stage, const std::string& config_hash,
                      std::uint64_t seed,
                      const std::vector<std::string>& arguments);

}  // namespace mave

#endif  // MAVE_PIPELINE_H_
