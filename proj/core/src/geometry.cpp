// Copyright 2026 The mlsreenact Authors.
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

#include "mlsr/geometry.hpp"

#include <string>
#include <utility>

#include "mlsr/error.hpp"

namespace mlsr {

PairedPointSet::PairedPointSet(std::vector<Point2> source,
                               std::vector<Point2> driving)
    : source_(std::move(source)), driving_(std::move(driving)) {
  if (source_.empty()) {
    throw InvalidInputError("paired point set must contain at least one point");
  }
  if (source_.size() != driving_.size()) {
    throw InvalidInputError("source has " + std::to_string(source_.size()) +
                            " points but driving has " +
                            std::to_string(driving_.size()));
  }
  for (std::size_t i = 0; i < source_.size(); ++i) {
    if (!is_finite(source_[i]) || !is_finite(driving_[i])) {
      throw InvalidInputError("non-finite coordinate at point " +
                              std::to_string(i));
    }
  }
}

PairedPointSet PairedPointSet::with_driving(std::size_t index, Point2 p) const {
  if (index >= driving_.size()) {
    throw InvalidInputError("point index " + std::to_string(index) +
                            " out of range");
  }
  std::vector<Point2> driving = driving_;
  driving[index] = p;
  return PairedPointSet(source_, std::move(driving));
}

}  // namespace mlsr
