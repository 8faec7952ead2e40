// Copyright 2026 The lpn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LPN_ERROR_HPP_
#define LPN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace lpn {

// Bad argument to a library call (shape mismatch, out-of-range rank, ...).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Invalid configuration (unknown env, malformed config file, bad checkpoint).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-convergence, NaN in dynamics or gradients.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Simulation produced a non-finite state; the episode cannot continue.
class SimulationDiverged : public NumericalError {
 public:
  explicit SimulationDiverged(const std::string& what) : NumericalError(what) {}
};

// File could not be read, written or parsed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Operation called on an object in the wrong state (e.g. tracing disabled).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace lpn

#endif  // LPN_ERROR_HPP_
