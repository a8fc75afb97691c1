// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Binaural signal matching: per-frequency regularized least-squares filters
// that map array signals to the two ear signals, so that plane waves from a
// grid of directions reproduce the corresponding HRTFs.
//
// Head frame: +x right, +y front, +z up. Azimuth is measured from the front
// towards the left (counter-clockwise seen from above), elevation upwards.

#ifndef MAVE_BINAURAL_H_
#define MAVE_BINAURAL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mave/fft.h"
#include "mave/room.h"
#include "mave/stft.h"
#include "mave/wave_io.h"

namespace mave {

// Unit vector pointing from the head towards (azimuth, elevation), degrees.
Vec3 DirectionFromAngles(double azimuth_deg, double elevation_deg);

struct DirectionGrid {
  std::vector<Vec3> directions;

  // 72 azimuths (5 degree steps) x elevations {-45, -22.5, 0, 22.5, 45}.
  static DirectionGrid Default();
  // Throws InvalidArgument if empty or any direction is not unit length.
  void Validate() const;
};

// Frequency-domain HRTFs on a direction grid, as read from a table file.
struct HrtfTable {
  std::vector<Vec3> directions;
  std::size_t bins = 0;   // frequencies k * fs / (2 (bins - 1)), k < bins
  int sample_rate = kSampleRate;
  // [ear][direction * bins + bin], ear 0 = left.
  std::array<std::vector<std::complex<float>>, 2> responses;
};

struct RigidSphereHrtf {
  double radius = 0.0875;
  double ear_azimuth_deg = 100.0;  // left ear at +100, right at -100
  double speed_of_sound = 343.0;
};

using HrtfModel = std::variant<RigidSphereHrtf, HrtfTable>;

// Free-field plane-wave response of each microphone (head-frame positions):
// exp(+j 2 pi f / c <direction, r_m>).
std::vector<Complex> SteeringVector(std::span<const Vec3> mic_positions,
                                    Vec3 direction, double freq_hz,
                                    double speed_of_sound = 343.0);

// (left, right) ear responses to a plane wave from |direction|, relative to
// the free-field pressure at the head center. The rigid-sphere series is
// summed until terms fall below 1e-6 of the running sum (SeriesNonConvergence
// otherwise). Table models use the nearest direction and bin. freq_hz must
// lie in [0, 8000].
std::pair<Complex, Complex> EarResponses(const HrtfModel& model, Vec3 direction,
                                         double freq_hz);

struct BsmFilters {
  std::size_t mics = 0;
  StftParams params;
  double regularization = 1e-4;
  // [ear][bin * mics + m]; ear 0 = left.
  std::array<std::vector<Complex>, 2> filters;

  std::size_t bins() const { return params.bins(); }
  Complex& at(std::size_t ear, std::size_t bin, std::size_t m) {
    return filters[ear][bin * mics + m];
  }
  const Complex& at(std::size_t ear, std::size_t bin, std::size_t m) const {
    return filters[ear][bin * mics + m];
  }
};

// Effective Tikhonov weight for one bin: |regularization| times the mean
// diagonal of A^H A, where A[d][m] is the steering vector of direction d.
double EffectiveRegularization(double regularization,
                               std::span<const std::vector<Complex>> rows);

// For every bin and ear, the c minimizing
//   sum_d |a_d^T c - H_e(d, f)|^2 + lambda_eff |c|^2
// where a_d is the steering vector of direction d; solved in closed form
// from the regularized normal equations. Ear signals are then
// p_e = sum_m c_m Y_m.
BsmFilters SolveBsm(std::span<const Vec3> mic_positions, const HrtfModel& hrtf,
                    const DirectionGrid& grid, double regularization = 1e-4,
                    const StftParams& params = {});

// Two-channel wave (left, right) with the same length as |signals|.
MultichannelWave RenderBinaural(const MultichannelWave& signals,
                                const BsmFilters& filters);

// Filter cache: file name derived from geometry, HRTF, grid, lambda and STFT
// parameters. LoadOrSolveBsm reads the cached file when present and writes
// it otherwise.
std::string BsmCacheKey(std::span<const Vec3> mic_positions,
                        const HrtfModel& hrtf, const DirectionGrid& grid,
                        double regularization, const StftParams& params);
void WriteBsmFilters(const BsmFilters& filters,
                     const std::filesystem::path& path);
BsmFilters ReadBsmFilters(const std::filesystem::path& path);
BsmFilters LoadOrSolveBsm(const std::filesystem::path& cache_dir,
                          std::span<const Vec3> mic_positions,
                          const HrtfModel& hrtf, const DirectionGrid& grid,
                          double regularization, const StftParams& params);

// HRTF table file (little-endian): char[8] "MAVEHRTF" | u32 version (1) |
// u32 D | u32 F | u32 fs | D x (f32 x, y, z) | left then right ear,
// each D x F float32 (re, im), direction-major.
void WriteHrtfTable(const HrtfTable& table, const std::filesystem::path& path);
HrtfTable ReadHrtfTable(const std::filesystem::path& path);

}  // namespace mave

#endif  // MAVE_BINAURAL_H_
