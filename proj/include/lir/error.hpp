// Copyright 2026-present the lir project
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

namespace lir {

enum class ErrorKind {
  ZeroVector,
  DimensionMismatch,
  DanglingParent,
  DuplicateParent,
  DuplicateChild,
  EmptyParent,
  EmptyQuery,
  NegativeGrade,
  UnknownParent,
  BadRecord,
  BadConfig,
  BadArgument,
  BadIndexFile,
  IoError,
};

const char* to_string(ErrorKind kind);

/// All errors raised by the engine. what() is "<kind>: <detail>", where
/// detail identifies the offending record, file, or argument.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lir
