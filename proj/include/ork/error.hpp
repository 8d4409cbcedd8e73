// Copyright 2026 The object-reward-kit Authors.
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

#ifndef ORK_ERROR_HPP_
#define ORK_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ork {

enum class ErrorKind {
  kParse,
  kSchema,
  kInvalidInput,
  kDegenerateFrame,
  kShape,
  kAlignment,
  kResample,
  kNumeric,
  kConfig,
  kIo,
};

inline const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kDegenerateFrame: return "degenerate frame";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kAlignment: return "alignment error";
    case ErrorKind::kResample: return "resample error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

// All library failures are reported as ork::Error; kind() drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ork

#endif  // ORK_ERROR_HPP_
