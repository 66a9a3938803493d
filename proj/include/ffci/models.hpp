// Copyright 2026 The FFCI Authors.
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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ffci {

// Pretrained checkpoints searched for layer selection. `layers` counts the
// transformer blocks served (encoder blocks only for encoder-decoder models);
// valid layer indices are 0 (embedding output) through `layers`.
struct ModelInfo {
  std::string_view id;
  int layers;
  int fa_layer;  // recommended layer for faithfulness
  int fo_layer;  // focus
  int c_layer;   // coverage
};

inline constexpr ModelInfo kModels[] = {
    {"bert-base-uncased", 12, 6, 1, 2},
    {"bert-large-uncased", 24, 11, 9, 9},
    {"roberta-base", 12, 10, 9, 2},
    {"roberta-large", 24, 13, 13, 3},
    {"roberta-large-mnli", 24, 14, 15, 3},
    {"xlnet-base-cased", 12, 6, 4, 2},
    {"xlnet-large-cased", 24, 7, 7, 5},
    {"gpt2", 12, 1, 3, 3},
    {"gpt2-medium", 24, 8, 5, 1},
    {"gpt2-large", 36, 2, 21, 3},
    {"gpt2-xl", 48, 2, 29, 4},
    {"t5-small", 6, 2, 3, 2},
    {"t5-base", 12, 3, 4, 4},
    {"t5-large", 24, 10, 13, 10},
    {"bart-base", 6, 1, 3, 1},
    {"bart-large", 12, 2, 5, 2},
    {"pegasus-xsum", 16, 8, 11, 6},
    {"pegasus-cnn_dailymail", 16, 12, 11, 5},
    {"pegasus-large", 16, 3, 4, 4},
};

inline std::optional<ModelInfo> find_model(std::string_view id) {
  for (const auto& m : kModels)
    if (m.id == id) return m;
  return std::nullopt;
}

}  // namespace ffci
