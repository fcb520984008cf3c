// Copyright 2026 The Stainscope Authors. All Rights Reserved.
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

/// @file error.h
/// @brief Exception hierarchy shared by every stainscope module.
///
/// Each error carries an ErrorKind so the CLI can map failures onto its exit
/// codes (2 for data errors, 3 for numeric errors).

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stainscope {

enum class ErrorKind {
  kInvalidInput,
  kInvalidShape,
  kCorruptModel,
  kEmptyBorder,
  kEmptySlide,
  kDegenerateLabels,
  kDegenerateFold,
  kStratification,
  kPlacement,
  kConfig,
  kIo,
  kNumeric,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kInvalidShape: return "invalid shape";
    case ErrorKind::kCorruptModel: return "corrupt model";
    case ErrorKind::kEmptyBorder: return "empty border";
    case ErrorKind::kEmptySlide: return "empty slide";
    case ErrorKind::kDegenerateLabels: return "degenerate labels";
    case ErrorKind::kDegenerateFold: return "degenerate fold";
    case ErrorKind::kStratification: return "stratification error";
    case ErrorKind::kPlacement: return "placement error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kNumeric: return "numeric error";
  }
  return "error";
}

}  // namespace stainscope
