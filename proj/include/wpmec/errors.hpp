// Copyright 2026 The wpmec Authors
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

namespace wpmec {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (dimension mismatch, negative durations...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a special function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Loss of positive definiteness, divergence, non-finite iterates.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The ellipsoid search never visited a feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Primal recovery could not build a feasible program from the duals.
class RecoveryError : public Error {
 public:
  using Error::Error;
};

}  // namespace wpmec
