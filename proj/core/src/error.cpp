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

#include "vocalis/error.hpp"

namespace vocalis {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::UnsupportedChannels: return "UnsupportedChannels";
    case ErrorCode::UnsupportedSampleRate: return "UnsupportedSampleRate";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::DuplicatePath: return "DuplicatePath";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::InsufficientSpeakers: return "InsufficientSpeakers";
    case ErrorCode::UnwritableOutput: return "UnwritableOutput";
    case ErrorCode::NoSpeechDetected: return "NoSpeechDetected";
    case ErrorCode::UnlabeledSequence: return "UnlabeledSequence";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NotEvaluated: return "NotEvaluated";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ShapeMismatch:
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::DegenerateData:
    case ErrorCode::NumericFailure:
      return 4;
    default:
      return 3;
  }
}

}  // namespace vocalis
