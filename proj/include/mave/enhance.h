// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MAVE_ENHANCE_H_
#define MAVE_ENHANCE_H_

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mave/mask.h"
#include "mave/stft.h"
#include "mave/wave_io.h"

namespace mave {

namespace provider {
// Mask of 1 everywhere.
struct Passthrough {};
// Compressed ideal complex ratio mask, decompressed before application.
struct OracleCirm {};
// Magnitude ratio |X|/|Y| with the mixture phase.
struct OracleIrm {};
// Masks computed elsewhere, read from a mask file.
struct ExternalFile {
  std::filesystem::path path;
};
}  // namespace provider

using MaskProvider =
    std::variant<provider::Passthrough, provider::OracleCirm,
                 provider::OracleIrm, provider::ExternalFile>;

// Stable condition name used in CSVs and reports: "Passthrough",
// "OracleCIRM", "OracleIRM" or "External".
std::string ProviderName(const MaskProvider& provider);

struct EnhancementResult {
  MultichannelWave enhanced;
  // sisdr_loss per channel against the oracle reference; empty when no
  // reference was supplied.
  std::vector<double> per_channel_sisdr_loss;
  // The masks as applied (raw domain).
  MaskSet masks;
};

// Applies one mask per microphone to that microphone's STFT and inverts it.
// Channels are processed independently and never combined.
EnhancementResult EnhanceScene(const MultichannelWave& mixture,
                               const MaskProvider& provider,
                               const MultichannelWave* oracle_ref = nullptr,
                               const StftParams& params = {});

// log10(|x_hat - a x|^2 / |a x|^2) with a = <x_hat, x> / |x|^2. The residual
// is floored at 1e-10 |a x|^2, so the result is >= -10. Throws ZeroReference
// when |x| = 0 and ZeroProjection when a = 0.
double SisdrLoss(std::span<const double> estimate,
                 std::span<const double> reference);

}  // namespace mave

#endif  // MAVE_ENHANCE_H_
