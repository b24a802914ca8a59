// Copyright 2026 The Memex Authors.
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

#ifndef MEMEX_SYNTH_H_
#define MEMEX_SYNTH_H_

#include <cstdint>
#include <vector>

#include "memex/corpus.h"

namespace memex {

// Small code-mixed demo corpus. Each meme is a flat background with one
// rectangle whose edges fall on the cell grid; the rectangle is the evidence
// mask. Pixel values are exact multiples of 1/255 so PNG round-trips are
// lossless.
struct SynthOptions {
  int count = 10;
  int width = 16;
  int height = 16;
  int grid_rows = 8;  // rectangle edges snap to height/grid_rows pixels
  int grid_cols = 8;
  std::uint64_t seed = 0;
};

std::vector<MemeSample> MakeSyntheticCorpus(const SynthOptions &options);

}  // namespace memex

#endif  // MEMEX_SYNTH_H_
