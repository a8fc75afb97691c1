// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/pipeline.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <json.hpp>

#include "mave/error.h"
#include "mave/fs_util.h"
#include "mave/metrics.h"

namespace mave {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path ManifestPath(const fs::path& out_dir) {
  return out_dir / "manifest.jsonl";
}

std::vector<SceneManifest> LoadScenes(const fs::path& out_dir) {
  const fs::path path = ManifestPath(out_dir);
  if (!fs::exists(path))
    throw Error(ErrorCode::kMissingStage,
                path.string() + " not found; run 'mave generate --out " +
                    out_dir.string() + "' first");
  return ReadManifestFile(path);
}

json ManifestHeaderJson(const fs::path& out_dir) {
  std::ifstream in(ManifestPath(out_dir));
  std::string line;
  std::getline(in, line);
  return json::parse(line, nullptr, false);
}

fs::path EnhancedPath(const fs::path& out_dir, const std::string& key,
                      const std::string& scene_id) {
  return out_dir / "enhanced" / key / (scene_id + ".wav");
}

fs::path BinauralPath(const fs::path& out_dir, const std::string& which,
                      const std::string& scene_id) {
  return out_dir / "binaural" / which / (scene_id + ".wav");
}

MultichannelWave ReadStageWav(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path))
    throw Error(ErrorCode::kMissingStage,
                path.string() + " not found; run '" + hint + "' first");
  return ReadWav(path);
}

std::string ConditionName(const std::string& key) {
  if (key == "passthrough") return "Passthrough";
  if (key == "oracle-cirm") return "OracleCIRM";
  if (key == "oracle-irm") return "OracleIRM";
  if (key == "external") return "External";
  throw Error(ErrorCode::kInvalidArgument, "unknown enhancer '" + key + "'");
}

void Label(std::vector<SceneFailure>& failures,
           const std::vector<SceneManifest>& scenes) {
  for (auto& f : failures) f.scene_id = scenes[f.index].scene_id;
}

// Joins per-scene JSON records into one JSON-lines file in manifest order.
void WriteLog(const fs::path& path, const std::vector<std::string>& records) {
  std::string text;
  for (const auto& r : records)
    if (!r.empty()) text += r + "\n";
  WriteFileAtomic(path, text);
}

struct Scores {
  double si_sdr = 0.0, stoi = 0.0, seg_snr = 0.0;
  std::optional<double> pesq;
};

Scores Score(const MultichannelWave& est, const MultichannelWave& ref,
             const std::optional<fs::path>& pesq_tool, const fs::path& tmp_dir,
             const std::string& tag) {
  if (est.channels() != ref.channels() || est.frames() != ref.frames())
    throw Error(ErrorCode::kShapeMismatch,
                tag + ": estimate and reference shapes differ");
  Scores s;
  double pesq_sum = 0.0;
  bool have_pesq = pesq_tool.has_value();
  const auto n = static_cast<double>(ref.channels());
  for (std::size_t m = 0; m < ref.channels(); ++m) {
    s.si_sdr += SiSdrDb(est.channel(m), ref.channel(m)) / n;
    s.stoi += Stoi(est.channel(m), ref.channel(m)) / n;
    s.seg_snr += SegSnr(est.channel(m), ref.channel(m)) / n;
    if (have_pesq) {
      const fs::path e = tmp_dir / (tag + "-" + std::to_string(m) + "-deg.wav");
      const fs::path r = tmp_dir / (tag + "-" + std::to_string(m) + "-ref.wav");
      WriteWav(est.Channel(m), e, SampleFormat::kPcm16);
      WriteWav(ref.Channel(m), r, SampleFormat::kPcm16);
      const auto score = PesqExternal(e, r, *pesq_tool);
      fs::remove(e);
      fs::remove(r);
      if (score) {
        pesq_sum += *score;
      } else {
        have_pesq = false;
      }
    }
  }
  if (have_pesq) s.pesq = pesq_sum / n;
  return s;
}

}  // namespace

Domain ParseDomain(const std::string& text) {
  if (text == "mic") return Domain::kMicrophone;
  if (text == "binaural") return Domain::kBinaural;
  if (text == "both") return Domain::kBoth;
  throw Error(ErrorCode::kInvalidArgument,
              "domain must be mic, binaural or both, got '" + text + "'");
}

MaskProvider ParseEnhancer(const std::string& text) {
  if (text == "passthrough") return provider::Passthrough{};
  if (text == "oracle-cirm") return provider::OracleCirm{};
  if (text == "oracle-irm") return provider::OracleIrm{};
  if (text.rfind("external:", 0) == 0 && text.size() > 9)
    return provider::ExternalFile{text.substr(9)};
  throw Error(ErrorCode::kInvalidArgument,
              "enhancer must be passthrough, oracle-cirm, oracle-irm or "
              "external:DIR, got '" + text + "'");
}

std::string EnhancerKey(const MaskProvider& provider) {
  if (std::holds_alternative<provider::Passthrough>(provider)) return "passthrough";
  if (std::holds_alternative<provider::OracleCirm>(provider)) return "oracle-cirm";
  if (std::holds_alternative<provider::OracleIrm>(provider)) return "oracle-irm";
  return "external";
}

StageResult CmdGenerate(const GenConfig& config, const fs::path& out_dir,
                        std::size_t workers) {
  DatasetResult dataset = GenerateDataset(config, out_dir, workers);
  StageResult result;
  result.failures = std::move(dataset.failures);
  result.processed = config.n_scenes - result.failures.size();
  return result;
}

StageResult CmdEnhance(const fs::path& out_dir, const MaskProvider& provider,
                       std::size_t workers) {
  const auto scenes = LoadScenes(out_dir);
  const std::string key = EnhancerKey(provider);
  const bool oracle = std::holds_alternative<provider::OracleCirm>(provider) ||
                      std::holds_alternative<provider::OracleIrm>(provider);
  std::vector<std::string> records(scenes.size());
  std::atomic<std::size_t> skipped{0};
  StageResult result;
  result.failures = ParallelFor(scenes.size(), workers, [&](std::size_t i) {
    const auto& scene = scenes[i];
    const fs::path wav = EnhancedPath(out_dir, key, scene.scene_id);
    const fs::path log = fs::path(wav).replace_extension(".json");
    if (fs::exists(wav) && fs::exists(log)) {
      records[i] = ReadFile(log);
      while (!records[i].empty() && records[i].back() == '\n') records[i].pop_back();
      ++skipped;
      return;
    }
    const MultichannelWave mixture = ReadWav(out_dir / scene.mixture_path);
    std::optional<MultichannelWave> clean;
    if (oracle) clean = ReadWav(out_dir / scene.clean_target_path);
    MaskProvider per_scene = provider;
    if (auto* ext = std::get_if<provider::ExternalFile>(&per_scene))
      ext->path = ext->path / (scene.scene_id + ".mask");
    const EnhancementResult enhanced =
        EnhanceScene(mixture, per_scene, clean ? &*clean : nullptr);
    WriteWav(enhanced.enhanced, wav);
    json losses = json::array();
    for (double v : enhanced.per_channel_sisdr_loss)
      losses.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    records[i] = json{{"scene_id", scene.scene_id},
                      {"condition", ProviderName(provider)},
                      {"sisdr_loss", losses}}
                     .dump();
    WriteFileAtomic(log, records[i] + "\n");
  });
  Label(result.failures, scenes);
  result.skipped = skipped;
  result.processed = scenes.size() - result.failures.size() - result.skipped;
  WriteLog(out_dir / "enhanced" / key / "log.jsonl", records);
  return result;
}

StageResult CmdRender(const fs::path& out_dir, const std::string& which,
                      std::size_t workers, const BinauralSetup& setup) {
  const auto scenes = LoadScenes(out_dir);
  if (which != "noisy" && which != "clean") ConditionName(which);
  // One filter set per distinct array geometry, solved before the pool.
  std::map<std::string, BsmFilters> filters;
  std::vector<std::string> keys(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& mics = scenes[i].array.mic_positions;
    keys[i] = BsmCacheKey(mics, setup.hrtf, setup.grid, setup.regularization,
                          setup.params);
    if (!filters.contains(keys[i]))
      filters.emplace(keys[i],
                      LoadOrSolveBsm(out_dir / "cache", mics, setup.hrtf,
                                     setup.grid, setup.regularization,
                                     setup.params));
  }
  std::atomic<std::size_t> skipped{0};
  StageResult result;
  result.failures = ParallelFor(scenes.size(), workers, [&](std::size_t i) {
    const auto& scene = scenes[i];
    const fs::path out = BinauralPath(out_dir, which, scene.scene_id);
    if (fs::exists(out)) {
      ++skipped;
      return;
    }
    fs::path in;
    if (which == "noisy") {
      in = out_dir / scene.mixture_path;
    } else if (which == "clean") {
      in = out_dir / scene.clean_target_path;
    } else {
      in = EnhancedPath(out_dir, which, scene.scene_id);
    }
    const MultichannelWave signals =
        ReadStageWav(in, "mave enhance --enhancer " + which);
    WriteWav(RenderBinaural(signals, filters.at(keys[i])), out);
  });
  Label(result.failures, scenes);
  result.skipped = skipped;
  result.processed = scenes.size() - result.failures.size() - result.skipped;
  return result;
}

StageResult CmdEvaluate(const fs::path& out_dir,
                        const std::vector<std::string>& enhancer_keys,
                        Domain domain, std::size_t workers) {
  const auto scenes = LoadScenes(out_dir);
  for (const auto& key : enhancer_keys) ConditionName(key);

  std::optional<fs::path> pesq_tool;
  if (const char* env = std::getenv(kPesqEnvVar); env != nullptr && *env) {
    pesq_tool = fs::path(env);
  } else {
    std::cerr << "note: " << kPesqEnvVar
              << " is not set; PESQ columns are left empty\n";
  }
  const fs::path tmp_dir = out_dir / "tmp";
  if (pesq_tool) fs::create_directories(tmp_dir);

  const bool mic = domain != Domain::kBinaural;
  const bool binaural = domain != Domain::kMicrophone;
  std::vector<std::vector<MetricsRow>> rows(scenes.size());
  StageResult result;
  result.failures = ParallelFor(scenes.size(), workers, [&](std::size_t i) {
    const auto& scene = scenes[i];
    const auto add = [&](const std::string& condition, const std::string& dom,
                         const MultichannelWave& est, const MultichannelWave& ref) {
      const Scores s = Score(est, ref, pesq_tool, tmp_dir,
                             scene.scene_id + "-" + condition + "-" + dom);
      rows[i].push_back({scene.scene_id, condition, dom, scene.snr_db,
                         ref.channels(), s.si_sdr, s.stoi, s.pesq, s.seg_snr});
    };
    if (mic) {
      const MultichannelWave ref = ReadWav(out_dir / scene.clean_target_path);
      add("Noisy", "microphone", ReadWav(out_dir / scene.mixture_path), ref);
      for (const auto& key : enhancer_keys)
        add(ConditionName(key), "microphone",
            ReadStageWav(EnhancedPath(out_dir, key, scene.scene_id),
                         "mave enhance --enhancer " + key),
            ref);
    }
    if (binaural) {
      const auto rendered = [&](const std::string& which) {
        return ReadStageWav(BinauralPath(out_dir, which, scene.scene_id),
                            "mave render --which " + which);
      };
      const MultichannelWave ref = rendered("clean");
      add("Noisy", "binaural", rendered("noisy"), ref);
      for (const auto& key : enhancer_keys)
        add(ConditionName(key), "binaural", rendered(key), ref);
    }
  });
  Label(result.failures, scenes);
  std::vector<MetricsRow> all;
  for (const auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  WriteFileAtomic(out_dir / "metrics.csv", MetricsToCsv(all));
  result.processed = scenes.size() - result.failures.size();
  return result;
}

void CmdReport(const fs::path& csv_path, const fs::path& report_path) {
  if (!fs::exists(csv_path))
    throw Error(ErrorCode::kMissingStage,
                csv_path.string() + " not found; run 'mave evaluate' first");
  const auto rows = MetricsFromCsv(ReadFile(csv_path));
  const auto table = Aggregate(rows);
  std::string metadata;
  const fs::path dir = csv_path.parent_path();
  if (fs::exists(ManifestPath(dir))) {
    const json header = ManifestHeaderJson(dir);
    if (header.is_object() && header.contains("config_hash"))
      metadata = "Config hash `" + header["config_hash"].get<std::string>() +
                 "`, seed " + header["seed"].dump() + ", " +
                 std::to_string(rows.size()) + " rows, tool version " +
                 kToolVersion + ".";
  }
  WriteFileAtomic(report_path, RenderReport(table, metadata));
}

std::pair<std::string, std::uint64_t> DatasetProvenance(
    const fs::path& out_dir) {
  LoadScenes(out_dir);
  const json header = ManifestHeaderJson(out_dir);
  if (!header.is_object() || !header.contains("config_hash") ||
      !header.contains("seed"))
    throw Error(ErrorCode::kMalformedFile, "manifest header lacks provenance");
  return {header["config_hash"].get<std::string>(),
          header["seed"].get<std::uint64_t>()};
}

void WriteRunMetadata(const fs::path& out_dir, const std::string& stage,
                      const std::string& config_hash, std::uint64_t seed,
                      const std::vector<std::string>& arguments) {
  const json j = {{"stage", stage},
                  {"config_hash", config_hash},
                  {"seed", seed},
                  {"tool", "mave"},
                  {"version", kToolVersion},
                  {"arguments", arguments}};
  WriteFileAtomic(out_dir / ("run-" + stage + ".json"), j.dump(2) + "\n");
}

}  // namespace mave
