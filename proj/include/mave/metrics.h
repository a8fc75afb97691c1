// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Objective speech metrics and the per-SNR aggregation behind the report
// tables.

#ifndef MAVE_METRICS_H_
#define MAVE_METRICS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mave {

// -10 * SisdrLoss: scale-invariant SDR in dB, capped at 100 dB.
double SiSdrDb(std::span<const double> estimate,
               std::span<const double> reference);

// Classic short-time objective intelligibility. Signals are resampled to
// 10 kHz, frames more than 40 dB below the loudest reference frame are
// dropped, and 15 one-third-octave bands from 150 Hz are correlated over
// 384 ms segments after -15 dB SDR clipping. Accepts fs of 16000 or 10000.
// Throws TooShort (< 30 frames of active speech) or AllSilent. The result
// is clamped to [0, 1].
double Stoi(std::span<const double> estimate, std::span<const double> reference,
            int fs = 16000);

// 16 kHz -> 10 kHz polyphase resampler (Kaiser beta 5, 161 taps) used by
// Stoi; exposed for testing.
std::vector<double> Resample16kTo10k(std::span<const double> x);

// Mean over non-overlapping frames of the per-frame SNR clamped to
// [min_db, max_db]. A trailing partial frame counts as a frame. Throws
// ZeroReference when the whole reference is silent.
double SegSnr(std::span<const double> estimate,
              std::span<const double> reference, std::size_t frame = 256,
              double min_db = -10.0, double max_db = 35.0);

// Name of the environment variable holding the PESQ executable path.
inline constexpr const char* kPesqEnvVar = "MAVE_PESQ_BIN";

// Runs "<tool> +16000 +wb <reference> <estimate>" (ITU-T P.862 reference
// command line, wideband mode) and parses the MOS-LQO score. Returns
// nullopt, with a warning on stderr, when no tool is configured or the
// configured path is not executable. Throws ToolFailure when the tool runs
// but fails or prints no score.
std::optional<double> PesqExternal(const std::filesystem::path& estimate_path,
                                   const std::filesystem::path& reference_path);
// Same, with an explicit tool path instead of the environment variable.
std::optional<double> PesqExternal(const std::filesystem::path& estimate_path,
                                   const std::filesystem::path& reference_path,
                                   const std::optional<std::filesystem::path>& tool);

// Extracts the score from PESQ tool output: the number after the last
// "MOS-LQO ... =" if present, else the last number in the text.
std::optional<double> ParsePesqOutput(const std::string& output);

struct MetricsRow {
  std::string scene_id;
  std::string condition;  // "Noisy" or an enhancer name
  std::string domain;     // "microphone" or "binaural"
  double snr_bucket = 0.0;
  std::size_t channels = 0;
  double si_sdr = 0.0;  // mean over channels / ears
  double stoi = 0.0;
  std::optional<double> pesq;
  double seg_snr = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct AggregateEntry {
  std::string condition;
  std::string domain;
  std::optional<double> snr_bucket;  // nullopt: Overall
  std::size_t count = 0;
  double si_sdr = 0.0;
  double stoi = 0.0;
  double seg_snr = 0.0;
  std::optional<double> pesq;  // mean over rows that have a score
};

// Arithmetic means per (condition, domain, snr_bucket) plus an Overall entry
// per (condition, domain). Entries are ordered by domain (microphone first),
// condition (Noisy first, then by name) and bucket, Overall last. The result
// does not depend on row order. Throws Empty.
std::vector<AggregateEntry> Aggregate(std::span<const MetricsRow> rows);

// RFC 4180 CSV with a header row.
std::string MetricsToCsv(std::span<const MetricsRow> rows);
std::vector<MetricsRow> MetricsFromCsv(const std::string& text);

// Markdown tables, one per domain, with SNR-bucket columns and Overall.
std::string RenderReport(std::span<const AggregateEntry> table,
                         const std::string& metadata = {});

}  // namespace mave

#endif  // MAVE_METRICS_H_
