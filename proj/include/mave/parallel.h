// Copyright 2026 The MAVe-sim Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MAVE_PARALLEL_H_
#define MAVE_PARALLEL_H_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace mave {

struct SceneFailure {
  std::size_t index = 0;
  std::string scene_id;
  std::string message;
};

// Runs fn(i) for every i in [0, n) on up to |workers| threads (0 means one).
// Exceptions are caught per item and returned sorted by index, with
// scene_id left empty.
std::vector<SceneFailure> ParallelFor(std::size_t n, std::size_t workers,
                                      const std::function<void(std::size_t)>& fn);

}  // namespace mave

#endif  // MAVE_PARALLEL_H_
