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

#pragma once

#include <string>

#include "dsc/tensor.hpp"

namespace dsc {

inline const Shape kImageShape{3, 64, 64};
inline const Shape kTextShape{1, 16, 128};

// One paired training/test item: a face (or glyph) image and a rendered name.
struct Sample {
  Tensor image;
  Tensor text;
  std::string label;

  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class Branch { kVision, kText, kJoint };

const char* branch_name(Branch b);
// Throws ConfigError for anything other than vision, text or joint.
Branch parse_branch(const std::string& name);

// Which external inputs are presented during inference.
struct BranchPresence {
  bool vision = true;
  bool text = true;

  bool present(Branch b) const {
    if (b == Branch::kVision) return vision;
    if (b == Branch::kText) return text;
    return vision || text;
  }
  static BranchPresence image_only() { return {true, false}; }
  static BranchPresence text_only() { return {false, true}; }
};

}  // namespace dsc
