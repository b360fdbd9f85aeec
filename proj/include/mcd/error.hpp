/* Copyright 2026 The mcd-lstm Authors. All Rights Reserved.

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
#ifndef MCD_ERROR_HPP_
#define MCD_ERROR_HPP_

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcd {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: shape mismatch, malformed file, precondition violation.
// The CLI maps this to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A well-formed request that has no admissible answer (no reuse factors fit
// the DSP budget, every architecture filtered out). CLI exit code 3.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& what) {
  throw ValidationError(what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

inline double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    require(used == s.size() && std::isfinite(v), "");
    return v;
  } catch (const std::exception&) {
    fail("bad " + what + " '" + s + "'");
  }
}

inline int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    require(used == s.size(), "");
    return v;
  } catch (const std::exception&) {
    fail("bad " + what + " '" + s + "'");
  }
}

}  // namespace detail
}  // namespace mcd

#endif  // MCD_ERROR_HPP_
