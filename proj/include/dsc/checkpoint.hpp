// Copyright 2026 The DSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Checkpoint file layout (all integers little-endian, version 1):
//
//   8 bytes   magic "DSCCKPT1"
//   u32       format version
//   string    canonical config text (u64 length + bytes)
//   u64       seed used for the initial kernels
//   u32       epochs completed
//   u64       inputs seen
//   u32       layer count, then per layer in config order:
//     string  layer name
//     u32     slot count, then per slot: u64 stride y, u64 stride x, tensor
//
// A tensor is u32 rank, u64 extents, then f64 values row-major. Files are
// written to "<path>.tmp" and renamed into place.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dsc/config.hpp"
#include "dsc/graph.hpp"

namespace dsc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  LayerGraph graph;
  std::uint64_t seed = 0;
  int epochs_completed = 0;
  std::uint64_t inputs_seen = 0;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws FormatError for damaged files or kernels that contradict the config.
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dsc
