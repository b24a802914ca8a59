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

#include "memex/synth.h"

#include <algorithm>
#include <string>

#include "memex/errors.h"
#include "memex/random.h"

namespace memex {
namespace {

const char *const kNeutral[] = {"yaar", "bhai", "kal", "movie", "dekhi", "phir", "office",
                                "chai", "time", "pe", "aaj", "weekend", "match", "log"};
const char *const kAbusive[] = {"pagal", "bewakoof", "loser", "gadha", "chup", "ugly",
                                "nikamma", "fake", "joker", "kamina"};

float Level(Rng &rng, int lo, int hi) { return float(lo + int(rng.Below(hi - lo + 1))) / 255.0f; }

}  // namespace

std::vector<MemeSample> MakeSyntheticCorpus(const SynthOptions &o) {
  if (o.count < 1 || o.grid_rows < 2 || o.grid_cols < 2 || o.width % o.grid_cols != 0 ||
      o.height % o.grid_rows != 0) {
    throw ConfigError("synthetic corpus: image size must be a multiple of a grid of at least 2x2");
  }
  Rng rng(Mix64(o.seed ^ 0x6d656d65ULL));
  const int cell_w = o.width / o.grid_cols, cell_h = o.height / o.grid_rows;
  std::vector<MemeSample> out;
  for (int i = 0; i < o.count; ++i) {
    MemeSample s;
    s.id = "synth_" + std::to_string(i);
    s.bully_label = 1;

    // Dark cool background, bright warm rectangle.
    const float bg[3] = {Level(rng, 10, 60), Level(rng, 20, 80), Level(rng, 90, 160)};
    const float fg[3] = {Level(rng, 200, 255), Level(rng, 120, 200), Level(rng, 0, 50)};
    const int r0 = int(rng.Below(o.grid_rows - 1));
    const int c0 = int(rng.Below(o.grid_cols - 1));
    const int r1 = r0 + 1 + int(rng.Below(o.grid_rows - r0 - 1));
    const int c1 = c0 + 1 + int(rng.Below(o.grid_cols - c0 - 1));
    s.image = ImageTensor(o.width, o.height);
    s.mask = BinaryMask(o.width, o.height);
    for (int y = 0; y < o.height; ++y) {
      for (int x = 0; x < o.width; ++x) {
        const int gr = y / cell_h, gc = x / cell_w;
        const bool on = gr >= r0 && gr <= r1 && gc >= c0 && gc <= c1;
        for (int c = 0; c < 3; ++c) s.image.at(c, y, x) = on ? fg[c] : bg[c];
        s.mask.set(y, x, on);
      }
    }

    const int length = 5 + int(rng.Below(4));
    const int abusive = 1 + int(rng.Below(3));
    for (int t = 0; t < length; ++t) {
      s.tokens.push_back(kNeutral[rng.Below(std::size(kNeutral))]);
      s.rationale.push_back(0);
    }
    for (int k = 0; k < abusive; ++k) {
      const int at = int(rng.Below(s.tokens.size()));
      s.tokens[at] = kAbusive[rng.Below(std::size(kAbusive))];
      s.rationale[at] = 1;
    }
    s.text = JoinTokens(s.tokens);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace memex
