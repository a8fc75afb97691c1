// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/enhance.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mave/error.h"

namespace mave {

std::string ProviderName(const MaskProvider& provider) {
  struct Namer {
    std::string operator()(const provider::Passthrough&) const {
      return "Passthrough";
    }
    std::string operator()(const provider::OracleCirm&) const {
      return "OracleCIRM";
    }
    std::string operator()(const provider::OracleIrm&) const {
      return "OracleIRM";
    }
    std::string operator()(const provider::ExternalFile&) const {
      return "External";
    }
  };
  return std::visit(Namer{}, provider);
}

double SisdrLoss(std::span<const double> estimate,
                 std::span<const double> reference) {
  if (estimate.size() != reference.size())
    throw Error(ErrorCode::kShapeMismatch, "estimate/reference length differ");
  double ref_energy = 0.0, dot = 0.0;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    ref_energy += reference[t] * reference[t];
    dot += estimate[t] * reference[t];
  }
  if (!(ref_energy > 0.0))
    throw Error(ErrorCode::kZeroReference, "reference has zero energy");
  const double alpha = dot / ref_energy;
  if (alpha == 0.0)
    throw Error(ErrorCode::kZeroProjection,
                "estimate is orthogonal to the reference");
  double residual = 0.0;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    const double e = estimate[t] - alpha * reference[t];
    residual += e * e;
  }
  const double scaled = alpha * alpha * ref_energy;
  return std::log10(std::max(residual, 1e-10 * scaled) / scaled);
}

namespace {

std::vector<MaskGrid> ProviderMasks(const MaskProvider& provider,
                                    std::span<const ComplexSpectrogram> mix,
                                    const MultichannelWave* oracle_ref,
                                    const StftParams& params) {
  const auto oracle_specs = [&] {
    if (oracle_ref == nullptr)
      throw Error(ErrorCode::kMissingOracleReference,
                  ProviderName(provider) + " needs the clean target");
    if (oracle_ref->channels() != mix.size())
      throw Error(ErrorCode::kChannelMismatch,
                  "oracle reference channel count differs from mixture");
    std::vector<ComplexSpectrogram> specs;
    for (std::size_t m = 0; m < mix.size(); ++m)
      specs.push_back(Stft(oracle_ref->channel(m), params, m));
    for (std::size_t m = 0; m < mix.size(); ++m)
      if (!specs[m].SameShape(mix[m]))
        throw Error(ErrorCode::kShapeMismatch,
                    "oracle reference length differs from mixture");
    return specs;
  };

  std::vector<MaskGrid> masks;
  if (std::holds_alternative<provider::Passthrough>(provider)) {
    for (const auto& spec : mix)
      masks.emplace_back(spec.bins(), spec.frames(), false, Complex{1.0, 0.0});
  } else if (std::holds_alternative<provider::OracleCirm>(provider)) {
    const auto clean = oracle_specs();
    for (std::size_t m = 0; m < mix.size(); ++m)
      masks.push_back(
          DecompressMask(IdealCirm(mix[m], clean[m], /*compress=*/true)));
  } else if (std::holds_alternative<provider::OracleIrm>(provider)) {
    const auto clean = oracle_specs();
    for (std::size_t m = 0; m < mix.size(); ++m)
      masks.push_back(IdealIrm(mix[m], clean[m]));
  } else {
    const auto& file = std::get<provider::ExternalFile>(provider);
    MaskSet set = ReadMaskSet(file.path);
    if (set.masks.size() != mix.size())
      throw Error(ErrorCode::kMaskShapeMismatch,
                  file.path.string() + ": mask has " +
                      std::to_string(set.masks.size()) +
                      " channels, mixture has " + std::to_string(mix.size()));
    for (std::size_t m = 0; m < mix.size(); ++m) {
      if (!set.masks[m].Matches(mix[m]))
        throw Error(ErrorCode::kMaskShapeMismatch,
                    file.path.string() + ": mask grid does not match the "
                                         "mixture STFT");
      masks.push_back(DecompressMask(set.masks[m], set.k, set.c));
    }
  }
  return masks;
}

}  // namespace

EnhancementResult EnhanceScene(const MultichannelWave& mixture,
                               const MaskProvider& provider,
                               const MultichannelWave* oracle_ref,
                               const StftParams& params) {
  if (mixture.empty())
    throw Error(ErrorCode::kInvalidArgument, "empty mixture");
  std::vector<ComplexSpectrogram> mix;
  mix.reserve(mixture.channels());
  for (std::size_t m = 0; m < mixture.channels(); ++m)
    mix.push_back(Stft(mixture.channel(m), params, m));

  EnhancementResult result;
  result.masks.masks = ProviderMasks(provider, mix, oracle_ref, params);
  result.enhanced = MultichannelWave(mixture.channels(), mixture.frames());
  for (std::size_t m = 0; m < mixture.channels(); ++m) {
    const auto channel =
        ApplyMask(mix[m], result.masks.masks[m], mixture.frames());
    std::ranges::copy(channel, result.enhanced.channel(m).begin());
  }
  if (oracle_ref != nullptr) {
    for (std::size_t m = 0; m < mixture.channels(); ++m) {
      double loss = std::numeric_limits<double>::quiet_NaN();
      try {
        loss = SisdrLoss(result.enhanced.channel(m), oracle_ref->channel(m));
      } catch (const Error&) {
        // Silent or orthogonal channels have no defined loss.
      }
      result.per_channel_sisdr_loss.push_back(loss);
    }
  }
  return result;
}

}  // namespace mave
