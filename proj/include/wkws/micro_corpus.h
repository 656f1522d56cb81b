// Copyright 2026 The wkws Authors.
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

#ifndef WKWS_MICRO_CORPUS_H_
#define WKWS_MICRO_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wkws/audio.h"
#include "wkws/rng.h"

namespace wkws {

// A tiny stand-in for a spoken keyword corpus: each "word" is a distinct
// harmonic tone pattern inside a 1 s, 16 kHz clip, with per-utterance
// pitch, timing and level jitter. Useful for smoke runs and capacity
// checks without external data.
struct MicroCorpusOptions {
  int clips_per_word = 10;
  int validation_per_word = 1;
  int test_per_word = 1;
  uint64_t seed = 1;
};

// The ten target words followed by two filler words that map to unknown.
const std::vector<std::string>& MicroCorpusWords();

AudioClip SynthesizeUtterance(int word_index, Rng& rng);

// Writes <dir>/<word>/<word>_NN.wav plus validation_list.txt and
// testing_list.txt in the usual corpus layout.
void WriteMicroCorpus(const std::filesystem::path& dir,
                      const MicroCorpusOptions& options = {});

}  // namespace wkws

#endif  // WKWS_MICRO_CORPUS_H_
