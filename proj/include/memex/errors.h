// Copyright 2026 The Memex Authors.
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

#ifndef MEMEX_ERRORS_H_
#define MEMEX_ERRORS_H_

#include <stdexcept>
#include <string>

namespace memex {

// Bad or inconsistent input data (manifests, images, masks, bundles).
// The CLI maps it to exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or mode/schedule mismatch. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checkpoint written by an incompatible model or format version.
class VersionError : public DataError {
 public:
  using DataError::DataError;
};

// Shape contract violated by a caller.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace memex

#endif  // MEMEX_ERRORS_H_
