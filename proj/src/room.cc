// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/room.h"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "mave/error.h"
#include "mave/fft.h"

namespace mave {

bool RoomSpec::Contains(Vec3 p) const {
  return p.x > 0.0 && p.x < dimensions.x && p.y > 0.0 && p.y < dimensions.y &&
         p.z > 0.0 && p.z < dimensions.z;
}

double RoomSpec::WallClearance(Vec3 p) const {
  return std::min({p.x, dimensions.x - p.x, p.y, dimensions.y - p.y, p.z,
                   dimensions.z - p.z});
}

Vec3 ArrayGeometry::AbsoluteMic(std::size_t m) const {
  const Vec3 r = mic_positions.at(m);
  const double c = std::cos(head_yaw), s = std::sin(head_yaw);
  return head_position + Vec3{c * r.x - s * r.y, s * r.x + c * r.y, r.z};
}

std::vector<Vec3> DefaultGlassesArray() {
  return {{-0.075, 0.070, 0.0},
          {0.075, 0.070, 0.0},
          {-0.082, -0.040, 0.0},
          {0.082, -0.040, 0.0}};
}

double T60ToAbsorption(const RoomSpec& room) {
  const auto& d = room.dimensions;
  if (!(d.x > 0.0 && d.y > 0.0 && d.z > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "room dimensions must be > 0");
  if (!(room.t60 > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "t60 must be > 0");
  const double alpha = 0.161 * room.Volume() / (room.SurfaceArea() * room.t60);
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::kAbsorptionOutOfRange,
                "Sabine absorption " + std::to_string(alpha) +
                    " is outside (0, 1) for this room and T60");
  return alpha;
}

std::size_t RirLength(const RoomSpec& room) {
  return static_cast<std::size_t>(
      std::ceil(1.2 * room.t60 * static_cast<double>(kSampleRate)));
}

double ReflectionFactor(double absorption) {
  return std::sqrt(1.0 - absorption);
}

namespace {

constexpr int kSincHalfWidth = 40;  // 81 taps
constexpr int kFracSteps = 2048;

// Hann-windowed sinc sampled at integer offsets k - frac, k in [-40, 40], for
// kFracSteps + 1 evenly spaced fractional delays in [0, 1].
const std::vector<double>& FractionalDelayTable() {
  static const std::vector<double> table = [] {
    constexpr int width = 2 * kSincHalfWidth + 1;
    std::vector<double> t(static_cast<std::size_t>(kFracSteps + 1) * width);
    for (int i = 0; i <= kFracSteps; ++i) {
      const double frac = static_cast<double>(i) / kFracSteps;
      for (int k = -kSincHalfWidth; k <= kSincHalfWidth; ++k) {
        const double x = k - frac;
        const double sinc =
            x == 0.0 ? 1.0
                     : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double window =
            0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * x / width));
        t[static_cast<std::size_t>(i) * width + (k + kSincHalfWidth)] =
            sinc * window;
      }
    }
    return t;
  }();
  return table;
}

struct AxisImage {
  double offset;  // image coordinate minus microphone coordinate
  int order;
};

std::vector<AxisImage> AxisImages(double length, double src, double mic,
                                  double reach) {
  std::vector<AxisImage> out;
  const int q_max = static_cast<int>(std::ceil(reach / (2.0 * length))) + 1;
  for (int q = -q_max; q <= q_max; ++q) {
    for (int p = 0; p <= 1; ++p) {
      const double pos = (1 - 2 * p) * src + 2.0 * q * length;
      const double offset = pos - mic;
      if (std::abs(offset) <= reach)
        out.push_back({offset, std::abs(2 * q - p)});
    }
  }
  return out;
}

// Calls visit(delay_samples, amplitude) for every image source whose arrival
// falls before |length| + the interpolation half-width.
template <typename Visit>
void ForEachImage(const RoomSpec& room, Vec3 source, Vec3 mic, double alpha,
                  std::size_t length, std::optional<int> max_order,
                  Visit&& visit) {
  const double reflect = ReflectionFactor(alpha);
  const double fs = kSampleRate;
  const double c = room.speed_of_sound;
  const double reach = (static_cast<double>(length) + kSincHalfWidth) / fs * c;
  const double reach2 = reach * reach;

  const auto xs = AxisImages(room.dimensions.x, source.x, mic.x, reach);
  const auto ys = AxisImages(room.dimensions.y, source.y, mic.y, reach);
  const auto zs = AxisImages(room.dimensions.z, source.z, mic.z, reach);

  int top_order = 0;
  for (const auto* v : {&xs, &ys, &zs}) {
    int m = 0;
    for (const auto& a : *v) m = std::max(m, a.order);
    top_order += m;
  }
  std::vector<double> gain(static_cast<std::size_t>(top_order) + 1);
  gain[0] = 1.0;
  for (std::size_t i = 1; i < gain.size(); ++i) gain[i] = gain[i - 1] * reflect;

  for (const auto& ix : xs) {
    const double dx2 = ix.offset * ix.offset;
    for (const auto& iy : ys) {
      const double dxy2 = dx2 + iy.offset * iy.offset;
      if (dxy2 > reach2) continue;
      for (const auto& iz : zs) {
        const double d2 = dxy2 + iz.offset * iz.offset;
        if (d2 > reach2) continue;
        const int order = ix.order + iy.order + iz.order;
        if (max_order && order > *max_order) continue;
        const double dist = std::sqrt(d2);
        visit(dist / c * fs, gain[static_cast<std::size_t>(order)] / dist);
      }
    }
  }
}

// Reverberation time of an energy envelope: Schroeder backward integration,
// least-squares slope between -5 and -35 dB, extrapolated to -60 dB.
double DecayT60(std::span<const double> energy) {
  std::vector<double> edc(energy.size());
  double acc = 0.0;
  for (std::size_t i = energy.size(); i-- > 0;) {
    acc += energy[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) return 0.0;
  double n = 0.0, st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double level = 10.0 * std::log10(edc[i] / acc);
    if (level < -35.0) break;
    if (level > -5.0) continue;
    const double t = static_cast<double>(i) / kSampleRate;
    n += 1.0;
    st += t;
    sl += level;
    stt += t * t;
    stl += t * level;
  }
  if (n < 2.0) return 0.0;
  const double slope = (n * stl - st * sl) / (n * stt - st * st);
  return slope < 0.0 ? -60.0 / slope : 0.0;
}

}  // namespace

std::vector<double> ImageEnergyEnvelope(const RoomSpec& room, Vec3 source,
                                        Vec3 mic, double absorption,
                                        std::size_t length) {
  std::vector<double> energy(length, 0.0);
  ForEachImage(room, source, mic, absorption, length, std::nullopt,
               [&](double delay, double amp) {
                 const auto i = static_cast<std::size_t>(std::lround(delay));
                 if (i < length) energy[i] += amp * amp;
               });
  return energy;
}

double CalibratedAbsorption(const RoomSpec& room) {
  // Validates the room and T60 the same way the Sabine inversion does.
  T60ToAbsorption(room);
  static std::mutex mu;
  static std::map<std::array<double, 5>, double> memo;
  const std::array<double, 5> key{room.dimensions.x, room.dimensions.y,
                                  room.dimensions.z, room.t60,
                                  room.speed_of_sound};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  const auto& d = room.dimensions;
  const Vec3 src{0.31 * d.x, 0.37 * d.y, 0.43 * d.z};
  const Vec3 mic{0.62 * d.x, 0.55 * d.y, 0.52 * d.z};
  const std::size_t length = RirLength(room);
  const auto decay = [&](double alpha) {
    return DecayT60(ImageEnergyEnvelope(room, src, mic, alpha, length));
  };
  double lo = 1e-3, hi = 0.999;
  if (decay(hi) > room.t60 || decay(lo) < room.t60)
    throw Error(ErrorCode::kAbsorptionOutOfRange,
                "no wall absorption reproduces T60 " +
                    std::to_string(room.t60) + " s in this room");
  // Decay time falls monotonically as absorption grows.
  for (int it = 0; it < 30; ++it) {
    const double mid = 0.5 * (lo + hi);
    (decay(mid) > room.t60 ? lo : hi) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  std::lock_guard<std::mutex> lock(mu);
  memo.emplace(key, alpha);
  return alpha;
}

std::vector<double> SimulateRir(const RoomSpec& room, Vec3 source, Vec3 mic,
                                const RirOptions& options) {
  if (!room.Contains(source) || !room.Contains(mic))
    throw Error(ErrorCode::kGeometryError, "source or microphone outside room");
  if (Distance(source, mic) < 0.1)
    throw Error(ErrorCode::kGeometryError,
                "source-microphone distance below 0.1 m");
  const double alpha = options.absorption ? *options.absorption
                                          : CalibratedAbsorption(room);
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::kAbsorptionOutOfRange, "absorption outside (0, 1]");
  const std::size_t length = options.length ? *options.length : RirLength(room);

  const auto& table = FractionalDelayTable();
  constexpr int width = 2 * kSincHalfWidth + 1;
  const long long len = static_cast<long long>(length);
  std::vector<double> rir(length, 0.0);
  ForEachImage(
      room, source, mic, alpha, length, options.max_order,
      [&](double delay, double amp) {
        const double base = std::floor(delay);
        const double pos = (delay - base) * kFracSteps;
        const int row = std::min(static_cast<int>(pos), kFracSteps - 1);
        const double w1 = pos - row;
        const double w0 = 1.0 - w1;
        const double* t0 = table.data() + static_cast<std::size_t>(row) * width;
        const double* t1 = t0 + width;
        const long long start = static_cast<long long>(base) - kSincHalfWidth;
        const int k_lo = static_cast<int>(std::max(0LL, -start));
        const int k_hi =
            static_cast<int>(std::min<long long>(width, len - start));
        for (int k = k_lo; k < k_hi; ++k)
          rir[static_cast<std::size_t>(start + k)] +=
              amp * (w0 * t0[k] + w1 * t1[k]);
      });
  if (options.high_pass) AllenBerkleyHighPass(rir);
  return rir;
}

void AllenBerkleyHighPass(std::span<double> rir) {
  // Two-pole 100 Hz high-pass with unit gain on the first sample, so a lone
  // direct-path impulse keeps its 1/d peak.
  const double w = 2.0 * std::numbers::pi * 100.0 / kSampleRate;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double y0 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : rir) {
    y2 = y1;
    y1 = y0;
    y0 = b1 * y1 + b2 * y2 + v;
    v = y0 + a1 * y1 + r1 * y2;
  }
}

MultichannelWave Spatialize(const MultichannelWave& dry,
                            std::span<const std::vector<double>> rirs) {
  if (dry.channels() != 1)
    throw Error(ErrorCode::kChannelMismatch, "dry signal must be mono");
  if (rirs.empty())
    throw Error(ErrorCode::kInvalidArgument, "no RIRs given");
  const std::size_t taps = rirs.front().size();
  if (taps == 0) throw Error(ErrorCode::kInvalidArgument, "empty RIR");
  MultichannelWave out(rirs.size(), dry.frames() + taps - 1);
  for (std::size_t m = 0; m < rirs.size(); ++m) {
    if (rirs[m].size() != taps)
      throw Error(ErrorCode::kInvalidArgument, "RIRs differ in length");
    const auto conv = FftConvolve(dry.channel(0), rirs[m]);
    std::ranges::copy(conv, out.channel(m).begin());
  }
  return out;
}

double Energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

MixResult MixAtSnr(const MultichannelWave& target,
                   std::span<const MultichannelWave> interferers,
                   double snr_db, double noise_floor_db, std::uint64_t seed) {
  if (interferers.empty())
    throw Error(ErrorCode::kInvalidArgument, "interferer list is empty");
  const std::size_t channels = target.channels();
  const std::size_t frames = target.frames();
  MultichannelWave interference(channels, frames);
  for (const auto& w : interferers) {
    if (w.channels() != channels || w.frames() != frames)
      throw Error(ErrorCode::kShapeMismatch,
                  "interferer shape differs from target");
    for (std::size_t m = 0; m < channels; ++m) {
      auto dst = interference.channel(m);
      auto src = w.channel(m);
      for (std::size_t t = 0; t < frames; ++t) dst[t] += src[t];
    }
  }
  const double e_target = Energy(target.channel(0));
  const double e_interf = Energy(interference.channel(0));
  if (e_target <= 0.0)
    throw Error(ErrorCode::kZeroEnergy, "target is silent at microphone 1");
  if (e_interf <= 0.0)
    throw Error(ErrorCode::kZeroEnergy,
                "interference is silent at microphone 1");
  const double gain =
      std::sqrt(e_target / (e_interf * std::pow(10.0, snr_db / 10.0)));
  const double sigma = std::sqrt(e_target / static_cast<double>(frames) *
                                 std::pow(10.0, noise_floor_db / 10.0));

  MixResult result{MultichannelWave(channels, frames), gain,
                   MultichannelWave(channels, frames),
                   MultichannelWave(channels, frames)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (std::size_t m = 0; m < channels; ++m) {
    auto tgt = target.channel(m);
    auto itf = interference.channel(m);
    auto mix = result.mixture.channel(m);
    auto scaled = result.scaled_interference.channel(m);
    auto noise = result.noise.channel(m);
    for (std::size_t t = 0; t < frames; ++t) {
      scaled[t] = gain * itf[t];
      noise[t] = sigma > 0.0 ? normal(rng) : 0.0;
      mix[t] = tgt[t] + scaled[t] + noise[t];
    }
  }
  return result;
}

}  // namespace mave
