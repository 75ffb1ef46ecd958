// Copyright 2026 The Vocalis Authors
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
#include <string_view>

namespace vocalis {

/// Failure kinds surfaced by the library. The CLI maps each kind onto an
/// exit status (see `exit_status`).
enum class ErrorCode {
  // data errors
  FileNotFound,
  MalformedHeader,
  UnsupportedEncoding,
  UnsupportedChannels,
  UnsupportedSampleRate,
  TruncatedData,
  DuplicatePath,
  UnknownLabel,
  MissingField,
  InsufficientSpeakers,
  UnwritableOutput,
  NoSpeechDetected,
  UnlabeledSequence,
  SingleClassDataset,
  EmptyInput,
  NotEvaluated,
  BadFormat,
  // contract errors
  ShapeMismatch,
  InvalidArgument,
  LabelOutOfRange,
  // numeric errors
  DegenerateData,
  NumericFailure,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// 2 usage, 3 data, 4 numeric.
int exit_status(ErrorCode code) noexcept;

}  // namespace vocalis
