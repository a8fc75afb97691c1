// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Shoebox room acoustics: image-source RIRs, convolution spatialization and
// SNR-calibrated mixing of a target with interfering talkers.

#ifndef MAVE_ROOM_H_
#define MAVE_ROOM_H_

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mave/wave_io.h"

namespace mave {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double Dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double Norm(Vec3 a) { return std::sqrt(Dot(a, a)); }
inline double Distance(Vec3 a, Vec3 b) { return Norm(a - b); }

struct RoomSpec {
  Vec3 dimensions;  // meters (Lx, Ly, Lz)
  double t60 = 0.5;  // seconds
  double speed_of_sound = 343.0;

  double Volume() const { return dimensions.x * dimensions.y * dimensions.z; }
  double SurfaceArea() const {
    const auto& d = dimensions;
    return 2.0 * (d.x * d.y + d.x * d.z + d.y * d.z);
  }
  bool Contains(Vec3 p) const;
  // Smallest distance from |p| to any of the six walls.
  double WallClearance(Vec3 p) const;
  friend bool operator==(const RoomSpec&, const RoomSpec&) = default;
};

// Microphones are given in the head frame (+x right, +y front, +z up) and
// placed in the room by a yaw rotation about z followed by translation.
struct ArrayGeometry {
  std::vector<Vec3> mic_positions;
  Vec3 head_position;
  double head_yaw = 0.0;  // radians, counter-clockwise seen from above

  std::size_t size() const { return mic_positions.size(); }
  Vec3 AbsoluteMic(std::size_t m) const;
  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

// Four-microphone glasses-like array: hinges (mics 1, 2) and temple tips
// (mics 3, 4), in meters relative to the head center.
std::vector<Vec3> DefaultGlassesArray();

// Sabine inversion: 0.161 V / (S T60). Throws AbsorptionOutOfRange unless the
// result lies strictly inside (0, 1).
double T60ToAbsorption(const RoomSpec& room);

// Wall absorption at which the image-source decay of this shoebox, measured
// by Schroeder integration, reproduces room.t60. Shoebox rooms with a low
// ceiling decay more slowly than Sabine predicts because horizontal paths
// rarely hit the floor or ceiling, so the Sabine value is only used to
// validate the request. Result is memoized per (dimensions, t60, c).
double CalibratedAbsorption(const RoomSpec& room);

// Arrival energy of every image (no interpolation), one bin per sample.
std::vector<double> ImageEnergyEnvelope(const RoomSpec& room, Vec3 source,
                                        Vec3 mic, double absorption,
                                        std::size_t length);

// ceil(1.2 * t60 * fs)
std::size_t RirLength(const RoomSpec& room);

struct RirOptions {
  // Highest reflection order to include; nullopt includes every image whose
  // arrival falls inside the RIR length.
  std::optional<int> max_order;
  // Overrides the calibrated absorption (limiting cases and tests).
  std::optional<double> absorption;
  // Overrides RirLength(room).
  std::optional<std::size_t> length;
  // Removes the DC build-up of the dense, all-positive late reflections.
  bool high_pass = true;
};

// Image-source RIR from |source| to |mic|. Each image contributes
// r^order / distance at a fractional delay realized with an 81-tap
// Hann-windowed sinc, where r is the per-bounce pressure reflection factor.
std::vector<double> SimulateRir(const RoomSpec& room, Vec3 source, Vec3 mic,
                                const RirOptions& options = {});

// In-place 100 Hz Allen-Berkley high-pass.
void AllenBerkleyHighPass(std::span<double> rir);

// Pressure reflection factor per wall bounce for a mean absorption.
double ReflectionFactor(double absorption);

// Convolves a mono dry signal with one RIR per microphone. Output length is
// T + L - 1.
MultichannelWave Spatialize(const MultichannelWave& dry,
                            std::span<const std::vector<double>> rirs);

struct MixResult {
  MultichannelWave mixture;
  double applied_gain = 0.0;
  // Components kept for re-measurement: g * summed interference and noise.
  MultichannelWave scaled_interference;
  MultichannelWave noise;
};

// mixture = target + g * sum(interferers) + noise, where g makes the
// target/interference energy ratio at microphone 1 equal |snr_db| and the
// i.i.d. Gaussian noise sits |noise_floor_db| below the target energy at
// microphone 1. Deterministic for a fixed seed.
MixResult MixAtSnr(const MultichannelWave& target,
                   std::span<const MultichannelWave> interferers,
                   double snr_db, double noise_floor_db, std::uint64_t seed);

double Energy(std::span<const double> x);

}  // namespace mave

#endif  // MAVE_ROOM_H_
