// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Complex ratio masks: ideal computation, bounded compression, application
// to a mixture spectrogram and the flat binary exchange format.

#ifndef MAVE_MASK_H_
#define MAVE_MASK_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "mave/stft.h"

namespace mave {

inline constexpr double kMaskBoundK = 10.0;
inline constexpr double kMaskSteepnessC = 0.1;
// Floor on |Y|^2 in the ratio X / Y.
inline constexpr double kMaskDenominatorFloor = 1e-10;

// One channel's mask on the STFT grid, [bins][frames].
class MaskGrid {
 public:
  MaskGrid() = default;
  MaskGrid(std::size_t bins, std::size_t frames, bool compressed = false,
           Complex fill = {0.0, 0.0})
      : bins_(bins), frames_(frames), compressed_(compressed),
        data_(bins * frames, fill) {}

  std::size_t bins() const { return bins_; }
  std::size_t frames() const { return frames_; }
  bool compressed() const { return compressed_; }

  Complex& at(std::size_t f, std::size_t n) { return data_[f * frames_ + n]; }
  const Complex& at(std::size_t f, std::size_t n) const {
    return data_[f * frames_ + n];
  }
  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  bool Matches(const ComplexSpectrogram& spec) const {
    return bins_ == spec.bins() && frames_ == spec.frames();
  }

 private:
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  bool compressed_ = false;
  std::vector<Complex> data_;
};

struct MaskSet {
  std::vector<MaskGrid> masks;  // one per microphone
  double k = kMaskBoundK;
  double c = kMaskSteepnessC;

  bool compressed() const { return !masks.empty() && masks[0].compressed(); }
};

// K (1 - exp(-C m)) / (1 + exp(-C m)), applied to real and imaginary parts
// separately. Odd, monotone, bounded by +-K.
double CompressMaskValue(double m, double k = kMaskBoundK,
                         double c = kMaskSteepnessC);
// Inverse of CompressMaskValue. Inputs at or beyond +-K are pulled just
// inside the open interval so the result stays finite.
double DecompressMaskValue(double v, double k = kMaskBoundK,
                           double c = kMaskSteepnessC);

MaskGrid CompressMask(const MaskGrid& raw, double k = kMaskBoundK,
                      double c = kMaskSteepnessC);
MaskGrid DecompressMask(const MaskGrid& compressed, double k = kMaskBoundK,
                        double c = kMaskSteepnessC);

// X / Y per TF bin with |Y|^2 floored; throws ShapeMismatch.
MaskGrid IdealCirm(const ComplexSpectrogram& mixture,
                   const ComplexSpectrogram& target, bool compress = false);

// |X| / |Y| as a real, zero-phase mask (mixture phase is kept).
MaskGrid IdealIrm(const ComplexSpectrogram& mixture,
                  const ComplexSpectrogram& target);

// istft(Y * M) trimmed or zero-padded to |out_len| samples. Throws
// ShapeMismatch or CompressedMaskApplied.
std::vector<double> ApplyMask(const ComplexSpectrogram& mixture,
                              const MaskGrid& mask, std::size_t out_len);

// Mask file layout (little-endian):
//   char[8] "MAVEMASK" | u32 version (1) | u32 M | u32 F | u32 N |
//   u32 flags (bit 0: compressed, bit 1: apply in raw domain) |
//   f32 K | f32 C | float32 (re, im) pairs ordered [m][f][n].
void WriteMaskSet(const MaskSet& set, const std::filesystem::path& path);
MaskSet ReadMaskSet(const std::filesystem::path& path);

}  // namespace mave

#endif  // MAVE_MASK_H_
