// Copyright (C) 2026 the icle authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace icle {

/// Error categories, mapped to process exit codes by the CLI.
enum class ErrorKind {
  kShape,     // tensor / matrix dimension mismatch
  kContract,  // API precondition or invariant violation
  kConfig,    // bad configuration value            (exit 2)
  kData,      // malformed input file or record     (exit 3)
  kNumeric,   // NaN/Inf or other numeric failure   (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_shape(const std::string& what) { throw Error(ErrorKind::kShape, what); }
[[noreturn]] inline void throw_contract(const std::string& what) { throw Error(ErrorKind::kContract, what); }
[[noreturn]] inline void throw_config(const std::string& what) { throw Error(ErrorKind::kConfig, what); }
[[noreturn]] inline void throw_data(const std::string& what) { throw Error(ErrorKind::kData, what); }
[[noreturn]] inline void throw_numeric(const std::string& what) { throw Error(ErrorKind::kNumeric, what); }

}  // namespace icle
