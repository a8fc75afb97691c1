// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/scene.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mave/error.h"
#include "mave/fs_util.h"

namespace mave {

using nlohmann::json;

namespace {

constexpr const char* kSyntheticPrefix = "synthetic:";
constexpr int kMaxPlacementAttempts = 1000;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json ToJson(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Vec3 Vec3FromJson(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::kMalformedFile, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<Vec3> Vec3ListFromJson(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kMalformedFile, "expected a list");
  std::vector<Vec3> out;
  for (const auto& e : j) out.push_back(Vec3FromJson(e));
  return out;
}

json ToJson(const std::vector<Vec3>& v) {
  json out = json::array();
  for (const auto& p : v) out.push_back(ToJson(p));
  return out;
}

json ToJson(const SourceSpec& s) {
  return {{"utterance_path", s.utterance_path},
          {"speaker", s.speaker},
          {"position", ToJson(s.position)},
          {"onset_offset_s", s.onset_offset_s},
          {"gain", s.gain}};
}

SourceSpec SourceFromJson(const json& j) {
  SourceSpec s;
  s.utterance_path = j.at("utterance_path").get<std::string>();
  s.speaker = j.at("speaker").get<std::string>();
  s.position = Vec3FromJson(j.at("position"));
  s.onset_offset_s = j.at("onset_offset_s").get<double>();
  s.gain = j.at("gain").get<double>();
  return s;
}

// Strips a trailing "# comment" that is not inside a JSON string.
std::string StripComment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_string && c == '\\') {
      ++i;
    } else if (c == '"') {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t UniformIndex(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Two-pole resonator with unity peak gain.
class Resonator {
 public:
  Resonator(double freq, double bandwidth) {
    const double r = std::exp(-std::numbers::pi * bandwidth / kSampleRate);
    a1_ = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / kSampleRate);
    a2_ = -r * r;
    gain_ = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(
                                          4.0 * std::numbers::pi * freq /
                                          kSampleRate) + r * r);
  }
  double operator()(double x) {
    const double y = gain_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0, a2_ = 0, gain_ = 1, y1_ = 0, y2_ = 0;
};

}  // namespace

void GenConfig::Validate() const {
  const auto bad = [](const std::string& why) {
    return Error(ErrorCode::kInvalidArgument, "config: " + why);
  };
  if (snr_grid.empty()) throw bad("snr_grid is empty");
  if (!(t60_range.first > 0.0 && t60_range.first <= t60_range.second))
    throw bad("t60_range must satisfy 0 < min <= max");
  if (rooms.empty()) throw bad("rooms is empty");
  for (const auto& r : rooms)
    if (!(r.x > 0 && r.y > 0 && r.z > 0)) throw bad("room dimensions must be > 0");
  if (!(solo_s >= 0.5)) throw bad("solo_s must be >= 0.5");
  if (interferers.first < 1 || interferers.second < interferers.first)
    throw bad("interferers must satisfy 1 <= min <= max");
  if (max_onset_offset_s < 0.0) throw bad("max_onset_offset_s must be >= 0");
  if (mic_positions.empty()) throw bad("mic_positions is empty");
  if (wall_clearance_m < 0.0 || array_clearance_m < 0.0)
    throw bad("clearances must be >= 0");
  if (corpus_dir.empty()) {
    if (synthetic_speakers < 2 || synthetic_utterances < 1)
      throw bad("synthetic corpus needs >= 2 speakers and >= 1 utterance");
    if (!(synthetic_duration_s > solo_s))
      throw bad("synthetic_duration_s must exceed solo_s");
  }
}

GenConfig ParseGenConfig(const std::string& text) {
  GenConfig c;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = Trim(StripComment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos)
      throw Error(ErrorCode::kInvalidArgument, where + "expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    json v;
    try {
      v = json::parse(Trim(line.substr(eq + 1)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, where + e.what());
    }
    try {
      if (key == "n_scenes") c.n_scenes = v.get<std::size_t>();
      else if (key == "snr_grid") c.snr_grid = v.get<std::vector<double>>();
      else if (key == "t60_range") c.t60_range = v.get<std::pair<double, double>>();
      else if (key == "rooms") c.rooms = Vec3ListFromJson(v);
      else if (key == "solo_s") c.solo_s = v.get<double>();
      else if (key == "interferers") {
        if (v.is_number_integer()) {
          c.interferers = {v.get<int>(), v.get<int>()};
        } else {
          c.interferers = v.get<std::pair<int, int>>();
        }
      }
      else if (key == "max_onset_offset_s") c.max_onset_offset_s = v.get<double>();
      else if (key == "noise_floor_db") c.noise_floor_db = v.get<double>();
      else if (key == "corpus_dir") c.corpus_dir = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "mic_positions") c.mic_positions = Vec3ListFromJson(v);
      else if (key == "wall_clearance_m") c.wall_clearance_m = v.get<double>();
      else if (key == "array_clearance_m") c.array_clearance_m = v.get<double>();
      else if (key == "synthetic_speakers") c.synthetic_speakers = v.get<std::size_t>();
      else if (key == "synthetic_utterances") c.synthetic_utterances = v.get<std::size_t>();
      else if (key == "synthetic_duration_s") c.synthetic_duration_s = v.get<double>();
      else throw Error(ErrorCode::kInvalidArgument, where + "unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, where + key + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidArgument) throw;
      throw Error(ErrorCode::kInvalidArgument, where + key + ": " + e.what());
    }
  }
  c.Validate();
  return c;
}

GenConfig LoadGenConfig(const std::filesystem::path& path) {
  return ParseGenConfig(ReadFile(path));
}

std::string GenConfigToText(const GenConfig& c) {
  std::ostringstream out;
  const auto put = [&](const char* key, const json& v) {
    out << key << " = " << v.dump() << '\n';
  };
  put("n_scenes", c.n_scenes);
  put("snr_grid", c.snr_grid);
  put("t60_range", json::array({c.t60_range.first, c.t60_range.second}));
  put("rooms", ToJson(c.rooms));
  put("solo_s", c.solo_s);
  put("interferers", json::array({c.interferers.first, c.interferers.second}));
  put("max_onset_offset_s", c.max_onset_offset_s);
  put("noise_floor_db", c.noise_floor_db);
  put("corpus_dir", c.corpus_dir);
  put("seed", c.seed);
  put("mic_positions", ToJson(c.mic_positions));
  put("wall_clearance_m", c.wall_clearance_m);
  put("array_clearance_m", c.array_clearance_m);
  put("synthetic_speakers", c.synthetic_speakers);
  put("synthetic_utterances", c.synthetic_utterances);
  put("synthetic_duration_s", c.synthetic_duration_s);
  return out.str();
}

std::string GenConfigHash(const GenConfig& config) {
  return HexDigest(Fnv1a64(GenConfigToText(config)));
}

std::size_t Corpus::size() const {
  std::size_t n = 0;
  for (const auto& [_, list] : speakers_) n += list.size();
  return n;
}

Corpus Corpus::FromDirectory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw Error(ErrorCode::kIoFailure,
                "corpus directory not found: " + dir.string());
  Corpus corpus;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const std::string speaker = entry.path().filename().string();
    std::vector<Utterance> list;
    for (const auto& f : fs::directory_iterator(entry.path()))
      if (f.is_regular_file() && f.path().extension() == ".wav")
        list.push_back({speaker, f.path().string()});
    if (list.empty()) continue;
    std::ranges::sort(list, {}, &Utterance::path);
    corpus.speakers_[speaker] = std::move(list);
  }
  return corpus;
}

Corpus Corpus::Synthetic(std::size_t speakers, std::size_t utterances,
                         double duration_s, std::uint64_t seed) {
  Corpus corpus;
  for (std::size_t s = 0; s < speakers; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "spk%02zu", s);
    std::vector<Utterance> list;
    for (std::size_t u = 0; u < utterances; ++u) {
      std::ostringstream path;
      path.precision(17);
      path << kSyntheticPrefix << seed << '/' << s << '/' << u << '/'
           << duration_s;
      list.push_back({name, path.str()});
    }
    corpus.speakers_[name] = std::move(list);
  }
  return corpus;
}

Corpus Corpus::ForConfig(const GenConfig& config) {
  if (!config.corpus_dir.empty()) return FromDirectory(config.corpus_dir);
  return Synthetic(config.synthetic_speakers, config.synthetic_utterances,
                   config.synthetic_duration_s, config.seed);
}

MultichannelWave SyntheticUtterance(std::uint64_t corpus_seed,
                                    std::size_t speaker, std::size_t index,
                                    double duration_s) {
  if (!(duration_s > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "duration must be > 0");
  const std::uint64_t voice_seed = SplitMix64(corpus_seed ^ SplitMix64(speaker));
  std::mt19937_64 voice(voice_seed);
  const double f1 = Uniform(voice, 300.0, 800.0);
  const double f2 = Uniform(voice, 900.0, 2200.0);
  const double f3 = Uniform(voice, 2300.0, 3300.0);
  Resonator r1(f1, 90.0), r2(f2, 130.0), r3(f3, 180.0);

  std::mt19937_64 rng(SplitMix64(voice_seed ^ SplitMix64(index + 1)));
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::lround(duration_s * kSampleRate));
  std::vector<double> x(n, 0.0);

  // Syllables of 150-350 ms (about 4 Hz) with random level; some are pauses.
  std::size_t t = 0;
  bool first = true;
  while (t < n) {
    const auto len = static_cast<std::size_t>(Uniform(rng, 0.15, 0.35) * kSampleRate);
    const bool pause = !first && Uniform(rng, 0.0, 1.0) < 0.15;
    const double level = pause ? 0.0 : Uniform(rng, 0.3, 1.0);
    for (std::size_t k = 0; k < len && t < n; ++k, ++t) {
      const double s = std::sin(std::numbers::pi * static_cast<double>(k) /
                                static_cast<double>(len));
      const double e = normal(rng);
      const double y = r1(e) + 0.7 * r2(e) + 0.4 * r3(e);
      x[t] = level * s * s * y;
    }
    first = false;
  }
  double energy = 0.0;
  for (double v : x) energy += v * v;
  const double scale =
      energy > 0.0 ? 0.05 / std::sqrt(energy / static_cast<double>(n)) : 0.0;
  MultichannelWave out(1, n);
  for (std::size_t i = 0; i < n; ++i) out.at(0, i) = x[i] * scale;
  return out;
}

MultichannelWave LoadUtterance(const std::string& path) {
  if (path.rfind(kSyntheticPrefix, 0) == 0) {
    std::uint64_t seed = 0;
    std::size_t speaker = 0, index = 0;
    double duration = 0.0;
    std::istringstream in(path.substr(std::char_traits<char>::length(kSyntheticPrefix)));
    char s1 = 0, s2 = 0, s3 = 0;
    if (!(in >> seed >> s1 >> speaker >> s2 >> index >> s3 >> duration) ||
        s1 != '/' || s2 != '/' || s3 != '/')
      throw Error(ErrorCode::kMalformedFile, "bad synthetic utterance: " + path);
    return SyntheticUtterance(seed, speaker, index, duration);
  }
  MultichannelWave w = ReadWav(path);
  if (w.channels() != 1)
    throw Error(ErrorCode::kMalformedFile, path + ": utterance must be mono");
  return w;
}

std::string ManifestToJson(const SceneManifest& m) {
  json interferers = json::array();
  for (const auto& s : m.interferers) interferers.push_back(ToJson(s));
  const json j = {
      {"scene_id", m.scene_id},
      {"seed", m.seed},
      {"room",
       {{"dimensions", ToJson(m.room.dimensions)},
        {"t60", m.room.t60},
        {"speed_of_sound", m.room.speed_of_sound}}},
      {"array",
       {{"mic_positions", ToJson(m.array.mic_positions)},
        {"head_position", ToJson(m.array.head_position)},
        {"head_yaw", m.array.head_yaw}}},
      {"target", ToJson(m.target)},
      {"interferers", interferers},
      {"snr_db", m.snr_db},
      {"noise_floor_db", m.noise_floor_db},
      {"solo_segment", json::array({m.solo_segment.first, m.solo_segment.second})},
      {"paths", {{"mixture", m.mixture_path}, {"clean_target", m.clean_target_path}}}};
  return j.dump();
}

SceneManifest ManifestFromJson(const std::string& line) {
  try {
    const json j = json::parse(line);
    SceneManifest m;
    m.scene_id = j.at("scene_id").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& room = j.at("room");
    m.room.dimensions = Vec3FromJson(room.at("dimensions"));
    m.room.t60 = room.at("t60").get<double>();
    m.room.speed_of_sound = room.at("speed_of_sound").get<double>();
    const auto& array = j.at("array");
    m.array.mic_positions = Vec3ListFromJson(array.at("mic_positions"));
    m.array.head_position = Vec3FromJson(array.at("head_position"));
    m.array.head_yaw = array.at("head_yaw").get<double>();
    m.target = SourceFromJson(j.at("target"));
    for (const auto& s : j.at("interferers")) m.interferers.push_back(SourceFromJson(s));
    m.snr_db = j.at("snr_db").get<double>();
    m.noise_floor_db = j.at("noise_floor_db").get<double>();
    m.solo_segment = j.at("solo_segment").get<std::pair<double, double>>();
    m.mixture_path = j.at("paths").at("mixture").get<std::string>();
    m.clean_target_path = j.at("paths").at("clean_target").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, std::string("manifest: ") + e.what());
  }
}

std::string ManifestHeader(const GenConfig& config) {
  return json{{"schema", "mave-manifest"},
              {"version", 1},
              {"config_hash", GenConfigHash(config)},
              {"seed", config.seed},
              {"n_scenes", config.n_scenes}}
      .dump();
}

std::vector<SceneManifest> ReadManifestFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::kMalformedFile, path.string() + ": missing header");
  try {
    const json header = json::parse(line);
    if (header.at("schema") != "mave-manifest" || header.at("version") != 1)
      throw Error(ErrorCode::kMalformedFile,
                  path.string() + ": unsupported manifest schema");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": " + e.what());
  }
  std::vector<SceneManifest> scenes;
  while (std::getline(in, line))
    if (!Trim(line).empty()) scenes.push_back(ManifestFromJson(line));
  return scenes;
}

SceneManifest SampleScene(const GenConfig& config, const Corpus& corpus,
                          std::uint64_t seed, const std::string& scene_id) {
  config.Validate();
  std::mt19937_64 rng(seed);
  SceneManifest m;
  m.scene_id = scene_id;
  m.seed = seed;
  m.noise_floor_db = config.noise_floor_db;

  m.room.dimensions = config.rooms[UniformIndex(rng, config.rooms.size())];
  m.room.t60 = Uniform(rng, config.t60_range.first,
                       std::nextafter(config.t60_range.second, 1e9));
  m.room.t60 = std::min(m.room.t60, config.t60_range.second);
  T60ToAbsorption(m.room);
  m.snr_db = config.snr_grid[UniformIndex(rng, config.snr_grid.size())];
  const int count = std::uniform_int_distribution<int>(
      config.interferers.first, config.interferers.second)(rng);

  std::vector<std::string> names;
  for (const auto& [name, _] : corpus.speakers()) names.push_back(name);
  if (names.size() < static_cast<std::size_t>(count) + 1)
    throw Error(ErrorCode::kCorpusTooSmall,
                "corpus has " + std::to_string(names.size()) +
                    " speakers, scene needs " + std::to_string(count + 1));
  for (std::size_t i = 0; i <= static_cast<std::size_t>(count); ++i)
    std::swap(names[i], names[i + UniformIndex(rng, names.size() - i)]);
  const auto pick = [&](const std::string& speaker) {
    const auto& list = corpus.speakers().at(speaker);
    return list[UniformIndex(rng, list.size())];
  };

  const Vec3 dims = m.room.dimensions;
  double array_radius = 0.0;
  for (const auto& p : config.mic_positions) array_radius = std::max(array_radius, Norm(p));
  const double head_margin = config.wall_clearance_m + array_radius;
  const auto inside = [&](double margin) {
    if (dims.x <= 2 * margin || dims.y <= 2 * margin || dims.z <= 2 * margin)
      throw Error(ErrorCode::kPlacementFailure,
                  "room too small for the clearance constraints");
    return Vec3{Uniform(rng, margin, dims.x - margin),
                Uniform(rng, margin, dims.y - margin),
                Uniform(rng, margin, dims.z - margin)};
  };
  m.array.mic_positions = config.mic_positions;
  m.array.head_position = inside(head_margin);
  m.array.head_yaw = Uniform(rng, 0.0, 2.0 * std::numbers::pi);

  const auto place = [&] {
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      const Vec3 p = inside(config.wall_clearance_m);
      bool ok = true;
      for (std::size_t k = 0; k < m.array.size() && ok; ++k)
        ok = Distance(p, m.array.AbsoluteMic(k)) >= config.array_clearance_m;
      if (ok) return p;
    }
    throw Error(ErrorCode::kPlacementFailure,
                "no valid source position after " +
                    std::to_string(kMaxPlacementAttempts) + " attempts");
  };

  const Utterance target = pick(names[0]);
  m.target = {target.path, target.speaker, place(), 0.0, 1.0};
  double first_onset = 1e300;
  for (int i = 0; i < count; ++i) {
    const Utterance u = pick(names[static_cast<std::size_t>(i) + 1]);
    const double onset_s = config.solo_s + Uniform(rng, 0.0, config.max_onset_offset_s);
    // Quantized to whole samples so the solo segment ends exactly where the
    // first interferer starts.
    const double onset = std::ceil(onset_s * kSampleRate) / kSampleRate;
    m.interferers.push_back({u.path, u.speaker, place(), onset, 1.0});
    first_onset = std::min(first_onset, onset);
  }
  m.solo_segment = {0.0, first_onset};
  m.mixture_path = "scenes/" + scene_id + "/mixture.wav";
  m.clean_target_path = "scenes/" + scene_id + "/clean.wav";
  return m;
}

RenderedScene RenderScene(const SceneManifest& manifest) {
  const auto& room = manifest.room;
  const auto& array = manifest.array;
  const auto spatialize = [&](const SourceSpec& s) {
    const MultichannelWave dry = LoadUtterance(s.utterance_path);
    std::vector<std::vector<double>> rirs;
    for (std::size_t k = 0; k < array.size(); ++k)
      rirs.push_back(SimulateRir(room, s.position, array.AbsoluteMic(k)));
    return Spatialize(dry, rirs);
  };
  RenderedScene out;
  out.manifest = manifest;
  out.clean_target = spatialize(manifest.target);
  const std::size_t frames = out.clean_target.frames();
  const std::size_t channels = out.clean_target.channels();
  const double target_len_s =
      static_cast<double>(frames) / static_cast<double>(kSampleRate);
  if (manifest.solo_segment.second - manifest.solo_segment.first < 0.5 ||
      manifest.solo_segment.second > target_len_s)
    throw Error(ErrorCode::kInvalidArgument,
                manifest.scene_id + ": solo segment must last >= 0.5 s inside the target");

  std::vector<MultichannelWave> interferers;
  for (const auto& s : manifest.interferers) {
    const MultichannelWave wet = spatialize(s);
    MultichannelWave placed(channels, frames);
    const auto onset =
        static_cast<std::size_t>(std::lround(s.onset_offset_s * kSampleRate));
    for (std::size_t m = 0; m < channels; ++m) {
      auto dst = placed.channel(m);
      auto src = wet.channel(m);
      for (std::size_t t = onset; t < frames && t - onset < src.size(); ++t)
        dst[t] = src[t - onset];
    }
    interferers.push_back(std::move(placed));
  }
  MixResult mix = MixAtSnr(out.clean_target, interferers, manifest.snr_db,
                           manifest.noise_floor_db,
                           SplitMix64(manifest.seed ^ 0x6e6f697365ULL));
  for (auto& s : out.manifest.interferers) s.gain = mix.applied_gain;
  out.mixture = std::move(mix.mixture);
  out.interference = std::move(mix.scaled_interference);
  out.noise = std::move(mix.noise);
  return out;
}

std::uint64_t SceneSeed(std::uint64_t config_seed, std::size_t index) {
  return SplitMix64(SplitMix64(config_seed) ^ static_cast<std::uint64_t>(index));
}

std::string SceneId(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05zu", index);
  return buf;
}

DatasetResult GenerateDataset(const GenConfig& config,
                              const std::filesystem::path& out_dir,
                              std::size_t workers) {
  namespace fs = std::filesystem;
  config.Validate();
  const Corpus corpus = Corpus::ForConfig(config);
  std::vector<std::string> lines(config.n_scenes);
  DatasetResult result;
  result.failures = ParallelFor(config.n_scenes, workers, [&](std::size_t i) {
    const std::string id = SceneId(i);
    const SceneManifest sampled =
        SampleScene(config, corpus, SceneSeed(config.seed, i), id);
    const fs::path record = out_dir / "scenes" / id / "scene.json";
    if (fs::exists(record) && fs::exists(out_dir / sampled.mixture_path) &&
        fs::exists(out_dir / sampled.clean_target_path)) {
      SceneManifest cached = ManifestFromJson(ReadFile(record));
      SceneManifest expected = sampled;
      for (std::size_t k = 0; k < expected.interferers.size() &&
                              k < cached.interferers.size(); ++k)
        expected.interferers[k].gain = cached.interferers[k].gain;
      if (cached == expected) {
        lines[i] = ManifestToJson(cached);
        return;
      }
    }
    const RenderedScene scene = RenderScene(sampled);
    WriteWav(scene.mixture, out_dir / sampled.mixture_path);
    WriteWav(scene.clean_target, out_dir / sampled.clean_target_path);
    lines[i] = ManifestToJson(scene.manifest);
    WriteFileAtomic(record, lines[i] + "\n");
  });
  for (auto& f : result.failures) f.scene_id = SceneId(f.index);

  std::string manifest = ManifestHeader(config) + "\n";
  for (const auto& line : lines)
    if (!line.empty()) manifest += line + "\n";
  result.manifest_path = out_dir / "manifest.jsonl";
  WriteFileAtomic(result.manifest_path, manifest);
  return result;
}

}  // namespace mave
