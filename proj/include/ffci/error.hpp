// Copyright 2026 The FFCI Authors.
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

namespace ffci {

// Base of everything the library throws. The CLI maps subclasses to exit
// codes: UsageError -> 1, DataError -> 2, ProviderError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed input files, invariant violations, undefined statistics.
class DataError : public Error {
 public:
  using Error::Error;
};

// Correlation requested on data with zero variance or too few points.
class UndefinedCorrelation : public DataError {
 public:
  using DataError::DataError;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

// Raised when a request cannot be answered because no backend is reachable
// (cache-only miss or unreachable endpoint). Callers with a heuristic
// fallback catch this one specifically.
class ProviderUnavailable : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

}  // namespace ffci
