// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MAVE_FS_UTIL_H_
#define MAVE_FS_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace mave {

// Writes to "<path>.tmp.<pid>" and renames over |path|, creating parent
// directories as needed. Readers never observe a partially written file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

std::string ReadFile(const std::filesystem::path& path);

// 64-bit FNV-1a; stable across platforms, used for cache keys and config
// fingerprints, not for security.
std::uint64_t Fnv1a64(std::string_view data, std::uint64_t seed = 0);

std::string HexDigest(std::uint64_t value);

}  // namespace mave

#endif  // MAVE_FS_UTIL_H_
