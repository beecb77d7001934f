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

#include "dsc/checkpoint.hpp"

#include "dsc/container.hpp"
#include "dsc/errors.hpp"

namespace dsc {
namespace {

constexpr std::string_view kMagic = "DSCCKPT1";

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  BinaryWriter w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  w.string(to_string(ckpt.config));
  w.u64(ckpt.seed);
  w.u32(static_cast<std::uint32_t>(ckpt.epochs_completed));
  w.u64(ckpt.inputs_seen);
  const auto& layers = ckpt.graph.layers();
  w.u32(static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    w.string(l.name);
    w.u32(static_cast<std::uint32_t>(l.kernels.size()));
    for (const auto& k : l.kernels) {
      w.u64(k.stride().y);
      w.u64(k.stride().x);
      w.tensor(k.kernels());
    }
  }
  return w.bytes();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  BinaryReader r(bytes);
  if (r.raw(kMagic.size()) != kMagic) throw FormatError("not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  try {
    ckpt.config = parse_config(r.string(), "checkpoint config");
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config: ") + e.what());
  }
  ckpt.seed = r.u64();
  ckpt.epochs_completed = static_cast<int>(r.u32());
  ckpt.inputs_seen = r.u64();
  ckpt.graph = build_graph(ckpt.config, ckpt.seed);

  const std::uint32_t n_layers = r.u32();
  if (n_layers != ckpt.graph.size()) throw FormatError("checkpoint layer count disagrees with its config");
  for (std::size_t i = 0; i < n_layers; ++i) {
    const auto& layer = ckpt.graph.layer(i);
    if (r.string() != layer.name) throw FormatError("checkpoint layer order disagrees with its config");
    if (r.u32() != layer.kernels.size()) throw FormatError("layer '" + layer.name + "': wrong slot count");
    for (std::size_t s = 0; s < layer.kernels.size(); ++s) {
      Stride stride;
      stride.y = r.u64();
      stride.x = r.u64();
      Tensor kernels = r.tensor();
      const KernelStack& expected = layer.kernels[s];
      if (stride != expected.stride() || kernels.shape() != expected.kernels().shape()) {
        throw FormatError("layer '" + layer.name + "': kernel geometry disagrees with its config");
      }
      ckpt.graph.kernels(i, s) = KernelStack(std::move(kernels), stride);
    }
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomically(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return deserialize_checkpoint(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace dsc
