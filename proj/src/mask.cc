// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/mask.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "mave/error.h"
#include "mave/fs_util.h"

namespace mave {

double CompressMaskValue(double m, double k, double c) {
  // K (1 - e^{-cm}) / (1 + e^{-cm}) == K tanh(cm / 2), without overflow.
  return k * std::tanh(0.5 * c * m);
}

double DecompressMaskValue(double v, double k, double c) {
  constexpr double kEdge = 1.0 - 1e-12;
  const double r = std::clamp(v / k, -kEdge, kEdge);
  // -(1/C) ln((K - v) / (K + v)) == (2/C) atanh(v / K)
  return 2.0 / c * std::atanh(r);
}

namespace {

MaskGrid MapParts(const MaskGrid& in, bool compressed,
                  double (*fn)(double, double, double), double k, double c) {
  MaskGrid out(in.bins(), in.frames(), compressed);
  auto src = in.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = {fn(src[i].real(), k, c), fn(src[i].imag(), k, c)};
  return out;
}

}  // namespace

MaskGrid CompressMask(const MaskGrid& raw, double k, double c) {
  if (raw.compressed())
    throw Error(ErrorCode::kInvalidArgument, "mask is already compressed");
  return MapParts(raw, true, &CompressMaskValue, k, c);
}

MaskGrid DecompressMask(const MaskGrid& compressed, double k, double c) {
  if (!compressed.compressed()) return compressed;
  return MapParts(compressed, false, &DecompressMaskValue, k, c);
}

MaskGrid IdealCirm(const ComplexSpectrogram& mixture,
                   const ComplexSpectrogram& target, bool compress) {
  if (!mixture.SameShape(target))
    throw Error(ErrorCode::kShapeMismatch,
                "mixture and target spectrograms differ in shape");
  MaskGrid mask(mixture.bins(), mixture.frames());
  auto y = mixture.data();
  auto x = target.data();
  auto m = mask.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yr = y[i].real(), yi = y[i].imag();
    const double xr = x[i].real(), xi = x[i].imag();
    const double denom = std::max(yr * yr + yi * yi, kMaskDenominatorFloor);
    m[i] = {(yr * xr + yi * xi) / denom, (yr * xi - yi * xr) / denom};
  }
  return compress ? CompressMask(mask) : mask;
}

MaskGrid IdealIrm(const ComplexSpectrogram& mixture,
                  const ComplexSpectrogram& target) {
  if (!mixture.SameShape(target))
    throw Error(ErrorCode::kShapeMismatch,
                "mixture and target spectrograms differ in shape");
  MaskGrid mask(mixture.bins(), mixture.frames());
  auto y = mixture.data();
  auto x = target.data();
  auto m = mask.data();
  for (std::size_t i = 0; i < y.size(); ++i)
    m[i] = std::sqrt(std::norm(x[i]) /
                     std::max(std::norm(y[i]), kMaskDenominatorFloor));
  return mask;
}

std::vector<double> ApplyMask(const ComplexSpectrogram& mixture,
                              const MaskGrid& mask, std::size_t out_len) {
  if (mask.compressed())
    throw Error(ErrorCode::kCompressedMaskApplied,
                "decompress the mask before applying it");
  if (!mask.Matches(mixture))
    throw Error(ErrorCode::kShapeMismatch,
                "mask grid " + std::to_string(mask.bins()) + "x" +
                    std::to_string(mask.frames()) +
                    " does not match the mixture spectrogram " +
                    std::to_string(mixture.bins()) + "x" +
                    std::to_string(mixture.frames()));
  ComplexSpectrogram masked = mixture;
  auto y = masked.data();
  auto m = mask.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= m[i];
  return Istft(masked, out_len);
}

namespace {

constexpr char kMaskMagic[8] = {'M', 'A', 'V', 'E', 'M', 'A', 'S', 'K'};
constexpr std::uint32_t kMaskVersion = 1;
constexpr std::uint32_t kFlagCompressed = 1u << 0;
constexpr std::uint32_t kFlagRawDomain = 1u << 1;

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T Take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size())
    throw Error(ErrorCode::kMalformedFile, "mask file truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void WriteMaskSet(const MaskSet& set, const std::filesystem::path& path) {
  if (set.masks.empty())
    throw Error(ErrorCode::kInvalidArgument, "mask set is empty");
  const std::size_t bins = set.masks[0].bins();
  const std::size_t frames = set.masks[0].frames();
  std::string out(kMaskMagic, sizeof(kMaskMagic));
  Put<std::uint32_t>(out, kMaskVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(set.masks.size()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(bins));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(frames));
  Put<std::uint32_t>(out, (set.compressed() ? kFlagCompressed : 0u) |
                              kFlagRawDomain);
  Put<float>(out, static_cast<float>(set.k));
  Put<float>(out, static_cast<float>(set.c));
  out.reserve(out.size() + set.masks.size() * bins * frames * 8);
  for (const auto& grid : set.masks) {
    if (grid.bins() != bins || grid.frames() != frames ||
        grid.compressed() != set.compressed())
      throw Error(ErrorCode::kMaskShapeMismatch,
                  "mask channels differ in shape or domain");
    for (const Complex& v : grid.data()) {
      Put<float>(out, static_cast<float>(v.real()));
      Put<float>(out, static_cast<float>(v.imag()));
    }
  }
  WriteFileAtomic(path, out);
}

MaskSet ReadMaskSet(const std::filesystem::path& path) {
  const std::string in = ReadFile(path);
  if (in.size() < sizeof(kMaskMagic) ||
      std::memcmp(in.data(), kMaskMagic, sizeof(kMaskMagic)) != 0)
    throw Error(ErrorCode::kMalformedFile, path.string() + ": bad magic");
  std::size_t pos = sizeof(kMaskMagic);
  const auto version = Take<std::uint32_t>(in, pos);
  if (version != kMaskVersion)
    throw Error(ErrorCode::kMalformedFile,
                path.string() + ": unsupported version " +
                    std::to_string(version));
  const auto mics = Take<std::uint32_t>(in, pos);
  const auto bins = Take<std::uint32_t>(in, pos);
  const auto frames = Take<std::uint32_t>(in, pos);
  const auto flags = Take<std::uint32_t>(in, pos);
  MaskSet set;
  set.k = Take<float>(in, pos);
  set.c = Take<float>(in, pos);
  const bool compressed = (flags & kFlagCompressed) != 0;
  const std::size_t expected =
      pos + static_cast<std::size_t>(mics) * bins * frames * 8;
  if (mics == 0 || in.size() != expected)
    throw Error(ErrorCode::kMalformedFile,
                path.string() + ": payload size does not match header");
  for (std::uint32_t m = 0; m < mics; ++m) {
    MaskGrid grid(bins, frames, compressed);
    for (Complex& v : grid.data()) {
      const float re = Take<float>(in, pos);
      const float im = Take<float>(in, pos);
      v = {re, im};
    }
    set.masks.push_back(std::move(grid));
  }
  return set;
}

}  // namespace mave
