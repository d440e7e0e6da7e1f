// Copyright 2026 The lungcadx Authors
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

// O(n^2) pairwise AUC: ties contribute 1/2. Returned as an exact fraction.

#include <cstdint>
#include <vector>

namespace lungcadx::oracle {

struct PairCount {
  std::int64_t doubled_wins;  // 2*wins + ties
  std::int64_t pairs;

  double auc() const { return static_cast<double>(doubled_wins) / (2.0 * pairs); }
};

inline PairCount pairwise_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
  PairCount pc{0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pc.pairs;
      if (scores[i] > scores[j]) pc.doubled_wins += 2;
      else if (scores[i] == scores[j]) pc.doubled_wins += 1;
    }
  }
  return pc;
}

}  // namespace lungcadx::oracle
