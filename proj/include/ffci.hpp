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

// Umbrella header.

#include "ffci/annotation.hpp"
#include "ffci/aspects.hpp"
#include "ffci/cache.hpp"
#include "ffci/coherence.hpp"
#include "ffci/corpus.hpp"
#include "ffci/correlation.hpp"
#include "ffci/embed.hpp"
#include "ffci/error.hpp"
#include "ffci/layer_selection.hpp"
#include "ffci/lexical.hpp"
#include "ffci/metrics.hpp"
#include "ffci/models.hpp"
#include "ffci/nsp_pairs.hpp"
#include "ffci/provider.hpp"
#include "ffci/report.hpp"
#include "ffci/run.hpp"
