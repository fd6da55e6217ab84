// Copyright 2026 The feynprobe Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace feynprobe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chain geometry is unusable (e.g. fewer than two sites).
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// A site index falls outside 1..s.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Brute-force oracle asked for a Hilbert space it refuses to build.
class OracleSizeError : public Error {
 public:
  using Error::Error;
};

/// Invalid probe or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The data are impossible under every grid node, so there is nothing to normalize.
class DegeneratePosterior : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace feynprobe
