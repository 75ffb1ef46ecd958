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

#include <cstddef>

#include "vocalis/tensor.hpp"

namespace vocalis {

/// Anything that maps a T x D feature matrix to T x K per-frame class
/// probabilities. Implementations must be safe to call concurrently.
class FrameClassifier {
 public:
  virtual ~FrameClassifier() = default;
  virtual tensor::Mat frame_probabilities(const tensor::Mat& frames) const = 0;
  virtual std::size_t num_classes() const = 0;
};

}  // namespace vocalis
