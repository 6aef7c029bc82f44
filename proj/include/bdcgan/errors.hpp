/* Copyright 2026 The bdcgan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BDCGAN_ERRORS_HPP_
#define BDCGAN_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bdcgan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents that do not line up with what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside an operation's domain (empty range, non one-hot label, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Malformed or corrupt file content: bad magic, checksum, truncation, version.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A batchnorm neuron whose gamma * inv_std is (numerically) zero has no
// threshold; the neuron index is kept so the operator can locate it.
class DegenerateNeuronError : public Error {
 public:
  DegenerateNeuronError(const std::string& layer, std::size_t neuron)
      : Error("degenerate batchnorm neuron " + std::to_string(neuron) + " in " +
              layer + ": |gamma * inv_std| below 1e-12"),
        layer_(layer),
        neuron_(neuron) {}

  const std::string& layer() const { return layer_; }
  std::size_t neuron() const { return neuron_; }

 private:
  std::string layer_;
  std::size_t neuron_;
};

// Non-finite loss during training.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace bdcgan

#endif  // BDCGAN_ERRORS_HPP_
