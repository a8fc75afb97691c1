// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/binaural.h"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "mave/error.h"
#include "mave/fs_util.h"

namespace mave {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr Complex kJ{0.0, 1.0};

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T Take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size())
    throw Error(ErrorCode::kMalformedFile, "file truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

// d/dx of a spherical Bessel-type function from its order-n and order-(n-1)
// values: f_n' = f_{n-1} - (n + 1) / x f_n.
double Derivative(unsigned n, double x, double fn, double fn_minus_1) {
  return fn_minus_1 - (n + 1.0) / x * fn;
}

// Pressure on a rigid sphere of radius a for a unit plane wave, at surface
// angle theta from the arrival direction (time convention e^{+j w t}):
//   p = -(j / (ka)^2) sum_n (2n + 1) j^n P_n(cos theta) / h_n'(ka),
// with h_n = j_n - j y_n the outgoing spherical Hankel function.
Complex RigidSpherePressure(double ka, double cos_theta) {
  if (ka == 0.0) return {1.0, 0.0};
  constexpr unsigned kMaxOrder = 200;
  Complex sum{0.0, 0.0};
  Complex j_pow{1.0, 0.0};  // j^n
  double p_prev = 1.0, p_cur = cos_theta;  // P_{n-1}, P_n (start n=0,1)
  double jn_prev = std::sph_bessel(1, ka);       // j_{-1} is unused at n=0
  double yn_prev = std::sph_neumann(1, ka);
  int small_terms = 0;
  for (unsigned n = 0; n <= kMaxOrder; ++n) {
    const double legendre = n == 0 ? 1.0 : (n == 1 ? cos_theta : p_cur);
    const double jn = std::sph_bessel(n, ka);
    const double yn = std::sph_neumann(n, ka);
    double djn, dyn;
    if (n == 0) {
      djn = -std::sph_bessel(1, ka);
      dyn = -std::sph_neumann(1, ka);
    } else {
      djn = Derivative(n, ka, jn, jn_prev);
      dyn = Derivative(n, ka, yn, yn_prev);
    }
    const Complex dh{djn, -dyn};
    const Complex term = (2.0 * n + 1.0) * j_pow * legendre / dh;
    sum += term;
    if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag()))
      throw Error(ErrorCode::kSeriesNonConvergence,
                  "rigid-sphere series diverged");
    if (static_cast<double>(n) > ka && std::abs(term) < 1e-6 * std::abs(sum)) {
      if (++small_terms >= 2) return -kJ / (ka * ka) * sum;
    } else {
      small_terms = 0;
    }
    jn_prev = jn;
    yn_prev = yn;
    j_pow *= kJ;
    if (n >= 1) {
      // Advance Legendre: P_{n+1} = ((2n+1) x P_n - n P_{n-1}) / (n+1)
      const double next =
          ((2.0 * n + 1.0) * cos_theta * p_cur - n * p_prev) / (n + 1.0);
      p_prev = p_cur;
      p_cur = next;
    }
  }
  throw Error(ErrorCode::kSeriesNonConvergence,
              "rigid-sphere series did not converge by order 200");
}

}  // namespace

Vec3 DirectionFromAngles(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * kDegToRad;
  const double el = elevation_deg * kDegToRad;
  return {-std::sin(az) * std::cos(el), std::cos(az) * std::cos(el),
          std::sin(el)};
}

DirectionGrid DirectionGrid::Default() {
  DirectionGrid grid;
  for (double el : {-45.0, -22.5, 0.0, 22.5, 45.0})
    for (int k = 0; k < 72; ++k)
      grid.directions.push_back(DirectionFromAngles(5.0 * k, el));
  return grid;
}

void DirectionGrid::Validate() const {
  if (directions.empty())
    throw Error(ErrorCode::kInvalidArgument, "direction grid is empty");
  for (const auto& d : directions)
    if (std::abs(Norm(d) - 1.0) > 1e-6)
      throw Error(ErrorCode::kInvalidArgument,
                  "direction grid entries must be unit vectors");
}

std::vector<Complex> SteeringVector(std::span<const Vec3> mic_positions,
                                    Vec3 direction, double freq_hz,
                                    double speed_of_sound) {
  const double k = 2.0 * std::numbers::pi * freq_hz / speed_of_sound;
  std::vector<Complex> v;
  v.reserve(mic_positions.size());
  for (const auto& r : mic_positions)
    v.push_back(std::exp(kJ * (k * Dot(direction, r))));
  return v;
}

std::pair<Complex, Complex> EarResponses(const HrtfModel& model, Vec3 direction,
                                         double freq_hz) {
  if (!(freq_hz >= 0.0 && freq_hz <= 8000.0))
    throw Error(ErrorCode::kInvalidArgument,
                "HRTF frequency must lie in [0, 8000] Hz");
  if (const auto* sphere = std::get_if<RigidSphereHrtf>(&model)) {
    const double ka = 2.0 * std::numbers::pi * freq_hz / sphere->speed_of_sound *
                      sphere->radius;
    const Vec3 left = DirectionFromAngles(sphere->ear_azimuth_deg, 0.0);
    const Vec3 right = DirectionFromAngles(-sphere->ear_azimuth_deg, 0.0);
    const double n = Norm(direction);
    return {RigidSpherePressure(ka, Dot(direction, left) / n),
            RigidSpherePressure(ka, Dot(direction, right) / n)};
  }
  const auto& table = std::get<HrtfTable>(model);
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t d = 0; d < table.directions.size(); ++d) {
    const double dot = Dot(table.directions[d], direction);
    if (dot > best_dot) {
      best_dot = dot;
      best = d;
    }
  }
  const double nyquist = table.sample_rate / 2.0;
  const auto bin = static_cast<std::size_t>(std::lround(
      std::min(freq_hz, nyquist) / nyquist * static_cast<double>(table.bins - 1)));
  const std::size_t idx = best * table.bins + bin;
  return {Complex(table.responses[0][idx]), Complex(table.responses[1][idx])};
}

double EffectiveRegularization(double regularization,
                               std::span<const std::vector<Complex>> rows) {
  if (rows.empty()) return regularization;
  const std::size_t mics = rows.front().size();
  double trace = 0.0;
  for (const auto& row : rows)
    for (const auto& v : row) trace += std::norm(v);
  return regularization * trace / static_cast<double>(mics);
}

BsmFilters SolveBsm(std::span<const Vec3> mic_positions, const HrtfModel& hrtf,
                    const DirectionGrid& grid, double regularization,
                    const StftParams& params) {
  if (mic_positions.empty())
    throw Error(ErrorCode::kInvalidArgument, "BSM needs at least one mic");
  if (!(regularization > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "BSM regularization must be > 0");
  grid.Validate();
  params.Validate();
  const std::size_t mics = mic_positions.size();
  const std::size_t dirs = grid.directions.size();
  const double speed = std::holds_alternative<RigidSphereHrtf>(hrtf)
                           ? std::get<RigidSphereHrtf>(hrtf).speed_of_sound
                           : 343.0;

  BsmFilters out;
  out.mics = mics;
  out.params = params;
  out.regularization = regularization;
  for (auto& f : out.filters) f.assign(params.bins() * mics, Complex{});

  Eigen::MatrixXcd a(dirs, mics);
  Eigen::VectorXcd h_left(dirs), h_right(dirs);
  std::vector<std::vector<Complex>> rows(dirs);
  for (std::size_t k = 0; k < params.bins(); ++k) {
    const double freq = static_cast<double>(k) * kSampleRate /
                        static_cast<double>(params.fft_size);
    for (std::size_t d = 0; d < dirs; ++d) {
      rows[d] = SteeringVector(mic_positions, grid.directions[d], freq, speed);
      for (std::size_t m = 0; m < mics; ++m) a(d, m) = rows[d][m];
      const auto [l, r] = EarResponses(hrtf, grid.directions[d], freq);
      h_left(d) = l;
      h_right(d) = r;
    }
    const double lambda = EffectiveRegularization(regularization, rows);
    Eigen::MatrixXcd normal = a.adjoint() * a;
    normal.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXcd> llt(normal);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::kSolveFailure,
                  "normal equations not positive definite at bin " +
                      std::to_string(k));
    const Eigen::VectorXcd c_left = llt.solve(a.adjoint() * h_left);
    const Eigen::VectorXcd c_right = llt.solve(a.adjoint() * h_right);
    if (!c_left.allFinite() || !c_right.allFinite())
      throw Error(ErrorCode::kSolveFailure,
                  "non-finite BSM filter at bin " + std::to_string(k));
    for (std::size_t m = 0; m < mics; ++m) {
      out.at(0, k, m) = c_left(static_cast<Eigen::Index>(m));
      out.at(1, k, m) = c_right(static_cast<Eigen::Index>(m));
    }
  }
  return out;
}

MultichannelWave RenderBinaural(const MultichannelWave& signals,
                                const BsmFilters& filters) {
  if (signals.channels() != filters.mics)
    throw Error(ErrorCode::kChannelMismatch,
                "signal has " + std::to_string(signals.channels()) +
                    " channels, filters expect " +
                    std::to_string(filters.mics));
  std::vector<ComplexSpectrogram> specs;
  for (std::size_t m = 0; m < signals.channels(); ++m)
    specs.push_back(Stft(signals.channel(m), filters.params, m));
  const std::size_t frames = specs.front().frames();
  MultichannelWave out(2, signals.frames());
  for (std::size_t ear = 0; ear < 2; ++ear) {
    ComplexSpectrogram acc(filters.params, frames, ear);
    for (std::size_t f = 0; f < filters.bins(); ++f) {
      for (std::size_t m = 0; m < filters.mics; ++m) {
        const Complex c = filters.at(ear, f, m);
        for (std::size_t n = 0; n < frames; ++n)
          acc.at(f, n) += c * specs[m].at(f, n);
      }
    }
    const auto p = Istft(acc, signals.frames());
    std::ranges::copy(p, out.channel(ear).begin());
  }
  return out;
}

std::string BsmCacheKey(std::span<const Vec3> mic_positions,
                        const HrtfModel& hrtf, const DirectionGrid& grid,
                        double regularization, const StftParams& params) {
  std::ostringstream s;
  s.precision(17);
  s << "bsm-v1";
  for (const auto& r : mic_positions) s << '|' << r.x << ',' << r.y << ',' << r.z;
  if (const auto* sphere = std::get_if<RigidSphereHrtf>(&hrtf)) {
    s << "|sphere," << sphere->radius << ',' << sphere->ear_azimuth_deg << ','
      << sphere->speed_of_sound;
  } else {
    const auto& table = std::get<HrtfTable>(hrtf);
    std::string raw;
    for (const auto& ear : table.responses)
      raw.append(reinterpret_cast<const char*>(ear.data()),
                 ear.size() * sizeof(ear[0]));
    s << "|table," << table.bins << ',' << table.directions.size() << ','
      << HexDigest(Fnv1a64(raw));
  }
  std::uint64_t grid_hash = 0;
  for (const auto& d : grid.directions) {
    std::ostringstream g;
    g.precision(17);
    g << d.x << ',' << d.y << ',' << d.z << ';';
    grid_hash = Fnv1a64(g.str(), grid_hash);
  }
  s << "|grid," << HexDigest(grid_hash) << "|lambda," << regularization
    << "|stft," << params.window_len << ',' << params.hop << ','
    << params.fft_size;
  return "bsm_" + HexDigest(Fnv1a64(s.str()));
}

namespace {
constexpr char kBsmMagic[8] = {'M', 'A', 'V', 'E', 'B', 'S', 'M', 'F'};
constexpr char kHrtfMagic[8] = {'M', 'A', 'V', 'E', 'H', 'R', 'T', 'F'};
}  // namespace

void WriteBsmFilters(const BsmFilters& filters,
                     const std::filesystem::path& path) {
  std::string out(kBsmMagic, sizeof(kBsmMagic));
  Put<std::uint32_t>(out, 1);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(filters.mics));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(filters.params.window_len));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(filters.params.hop));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(filters.params.fft_size));
  Put<double>(out, filters.regularization);
  for (const auto& ear : filters.filters)
    for (const auto& c : ear) {
      Put<double>(out, c.real());
      Put<double>(out, c.imag());
    }
  WriteFileAtomic(path, out);
}

BsmFilters ReadBsmFilters(const std::filesystem::path& path) {
  const std::string in = ReadFile(path);
  if (in.size() < 8 || std::memcmp(in.data(), kBsmMagic, 8) != 0)
    throw Error(ErrorCode::kMalformedFile, path.string() + ": bad magic");
  std::size_t pos = 8;
  if (Take<std::uint32_t>(in, pos) != 1)
    throw Error(ErrorCode::kMalformedFile, path.string() + ": bad version");
  BsmFilters f;
  f.mics = Take<std::uint32_t>(in, pos);
  f.params.window_len = Take<std::uint32_t>(in, pos);
  f.params.hop = Take<std::uint32_t>(in, pos);
  f.params.fft_size = Take<std::uint32_t>(in, pos);
  f.regularization = Take<double>(in, pos);
  const std::size_t count = f.params.bins() * f.mics;
  if (in.size() != pos + 2 * count * 2 * sizeof(double))
    throw Error(ErrorCode::kMalformedFile, path.string() + ": size mismatch");
  for (auto& ear : f.filters) {
    ear.resize(count);
    for (auto& c : ear) {
      const double re = Take<double>(in, pos);
      const double im = Take<double>(in, pos);
      c = {re, im};
    }
  }
  return f;
}

BsmFilters LoadOrSolveBsm(const std::filesystem::path& cache_dir,
                          std::span<const Vec3> mic_positions,
                          const HrtfModel& hrtf, const DirectionGrid& grid,
                          double regularization, const StftParams& params) {
  const auto path =
      cache_dir /
      (BsmCacheKey(mic_positions, hrtf, grid, regularization, params) + ".bin");
  if (std::filesystem::exists(path)) return ReadBsmFilters(path);
  BsmFilters filters =
      SolveBsm(mic_positions, hrtf, grid, regularization, params);
  WriteBsmFilters(filters, path);
  return filters;
}

void WriteHrtfTable(const HrtfTable& table, const std::filesystem::path& path) {
  const std::size_t count = table.directions.size() * table.bins;
  if (table.responses[0].size() != count || table.responses[1].size() != count)
    throw Error(ErrorCode::kShapeMismatch, "HRTF table response size");
  std::string out(kHrtfMagic, sizeof(kHrtfMagic));
  Put<std::uint32_t>(out, 1);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(table.directions.size()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(table.bins));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(table.sample_rate));
  for (const auto& d : table.directions) {
    Put<float>(out, static_cast<float>(d.x));
    Put<float>(out, static_cast<float>(d.y));
    Put<float>(out, static_cast<float>(d.z));
  }
  for (const auto& ear : table.responses)
    for (const auto& c : ear) {
      Put<float>(out, c.real());
      Put<float>(out, c.imag());
    }
  WriteFileAtomic(path, out);
}

HrtfTable ReadHrtfTable(const std::filesystem::path& path) {
  const std::string in = ReadFile(path);
  if (in.size() < 8 || std::memcmp(in.data(), kHrtfMagic, 8) != 0)
    throw Error(ErrorCode::kMalformedFile, path.string() + ": bad magic");
  std::size_t pos = 8;
  if (Take<std::uint32_t>(in, pos) != 1)
    throw Error(ErrorCode::kMalformedFile, path.string() + ": bad version");
  HrtfTable t;
  const std::size_t dirs = Take<std::uint32_t>(in, pos);
  t.bins = Take<std::uint32_t>(in, pos);
  t.sample_rate = static_cast<int>(Take<std::uint32_t>(in, pos));
  if (dirs == 0 || t.bins < 2)
    throw Error(ErrorCode::kMalformedFile, path.string() + ": empty table");
  if (in.size() != pos + dirs * 3 * sizeof(float) +
                       2 * dirs * t.bins * 2 * sizeof(float))
    throw Error(ErrorCode::kMalformedFile, path.string() + ": size mismatch");
  for (std::size_t d = 0; d < dirs; ++d) {
    Vec3 v;
    v.x = Take<float>(in, pos);
    v.y = Take<float>(in, pos);
    v.z = Take<float>(in, pos);
    t.directions.push_back(v);
  }
  for (auto& ear : t.responses) {
    ear.resize(dirs * t.bins);
    for (auto& c : ear) {
      const float re = Take<float>(in, pos);
      const float im = Take<float>(in, pos);
      c = {re, im};
    }
  }
  return t;
}

}  // namespace mave
