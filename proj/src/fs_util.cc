// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mave/fs_util.h"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <system_error>

#include "mave/error.h"

namespace mave {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnsupportedSampleRate: return "UnsupportedSampleRate";
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kAbsorptionOutOfRange: return "AbsorptionOutOfRange";
    case ErrorCode::kGeometryError: return "GeometryError";
    case ErrorCode::kZeroEnergy: return "ZeroEnergy";
    case ErrorCode::kCorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::kPlacementFailure: return "PlacementFailure";
    case ErrorCode::kNonColaParams: return "NonColaParams";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kCompressedMaskApplied: return "CompressedMaskApplied";
    case ErrorCode::kMissingOracleReference: return "MissingOracleReference";
    case ErrorCode::kMaskShapeMismatch: return "MaskShapeMismatch";
    case ErrorCode::kZeroReference: return "ZeroReference";
    case ErrorCode::kZeroProjection: return "ZeroProjection";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kAllSilent: return "AllSilent";
    case ErrorCode::kToolMissing: return "ToolMissing";
    case ErrorCode::kToolFailure: return "ToolFailure";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kSeriesNonConvergence: return "SeriesNonConvergence";
    case ErrorCode::kSolveFailure: return "SolveFailure";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingStage: return "MissingStage";
  }
  return "Unknown";
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view data) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
      throw Error(ErrorCode::kIoFailure, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIoFailure, "cannot rename into " + path.string());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t Fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string HexDigest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace mave
