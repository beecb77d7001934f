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

#include <stdexcept>
#include <string>
#include <utility>

namespace dsc {

// Base of every error the library throws. Callers that only care about
// "something went wrong in dsc" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or kernel shapes that cannot be combined.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Violated precondition on an argument (empty subset, bad parameter range).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed layer graph or a reference to a layer that does not exist.
class GraphError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced during integration or learning.
class NumericDivergence : public Error {
 public:
  NumericDivergence(std::string layer, long iteration, const std::string& what)
      : Error("numeric divergence in layer '" + layer + "' at iteration " +
              std::to_string(iteration) + ": " + what),
        layer_(std::move(layer)),
        iteration_(iteration) {}

  const std::string& layer() const { return layer_; }
  long iteration() const { return iteration_; }

 private:
  std::string layer_;
  long iteration_;
};

// Text that cannot be rasterized with the embedded font.
class RenderError : public Error {
 public:
  using Error::Error;
};

// Missing, unreadable or undecodable input file.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration file or field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Checkpoint/corpus container read or write failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsc
