// Copyright 2026 The lungcadx Authors
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

namespace lungcadx {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File missing, unreadable, or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed metadata, CSV, or JSON content.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Raw payload length disagrees with the declared dimensions.
class SizeMismatchError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition (bad coordinates, width mismatch, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Leaf with H + lambda == 0.
class DegenerateLeafError : public Error {
 public:
  using Error::Error;
};

// SMO hit its hard update cap before satisfying the KKT tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace lungcadx
