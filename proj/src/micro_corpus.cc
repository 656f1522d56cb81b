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

#include "wkws/micro_corpus.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "wkws/error.h"

namespace wkws {
namespace fs = std::filesystem;

const std::vector<std::string>& MicroCorpusWords() {
  static const std::vector<std::string> words = {
      "yes", "no", "up", "down", "left", "right", "on",
      "off", "stop", "go", "bed", "cat"};
  return words;
}

AudioClip SynthesizeUtterance(int word_index, Rng& rng) {
  constexpr int kRate = 16000;
  AudioClip clip;
  clip.sample_rate = kRate;
  clip.samples.assign(kRate, 0.0f);

  // Word identity: a two-part pitch contour with a word-specific start
  // frequency and glide direction.
  const double jitter = rng.Uniform(0.98, 1.02);
  const double f_start = (260.0 + 95.0 * word_index) * jitter;
  const double f_end = f_start * (word_index % 2 == 0 ? 1.45 : 0.7);
  const double duration = rng.Uniform(0.45, 0.6);
  const double onset = rng.Uniform(0.1, 0.95 - duration);
  const double level = rng.Uniform(0.25, 0.45);

  const int begin = static_cast<int>(onset * kRate);
  const int len = static_cast<int>(duration * kRate);
  double phase = 0.0;
  for (int i = 0; i < len; ++i) {
    const double u = static_cast<double>(i) / len;
    const double f = f_start + (f_end - f_start) * u;
    phase += 2.0 * std::numbers::pi * f / kRate;
    const double env = std::sin(std::numbers::pi * u);
    const double v = std::sin(phase) + 0.5 * std::sin(2 * phase) +
                     0.25 * std::sin(3 * phase);
    clip.samples[begin + i] = static_cast<float>(level * env * v / 1.75);
  }
  for (float& s : clip.samples) s += static_cast<float>(0.003 * rng.Normal());
  return clip;
}

void WriteMicroCorpus(const fs::path& dir, const MicroCorpusOptions& options) {
  if (options.clips_per_word < options.validation_per_word + options.test_per_word + 1) {
    throw DomainError("micro corpus needs at least one training clip per word");
  }
  const auto& words = MicroCorpusWords();
  fs::create_directories(dir);
  std::ofstream val(dir / "validation_list.txt", std::ios::trunc);
  std::ofstream test(dir / "testing_list.txt", std::ios::trunc);
  if (!val || !test) throw IoError("cannot write split lists under " + dir.string());
  Rng root(options.seed);
  for (std::size_t w = 0; w < words.size(); ++w) {
    fs::create_directories(dir / words[w]);
    for (int k = 0; k < options.clips_per_word; ++k) {
      Rng rng = root.Split(w).Split(static_cast<uint64_t>(k));
      char name[64];
      std::snprintf(name, sizeof name, "%s_%02d.wav", words[w].c_str(), k);
      SaveWav(SynthesizeUtterance(static_cast<int>(w), rng), dir / words[w] / name);
      const std::string rel = words[w] + "/" + name;
      if (k < options.test_per_word) {
        test << rel << "\n";
      } else if (k < options.test_per_word + options.validation_per_word) {
        val << rel << "\n";
      }
    }
  }
}

}  // namespace wkws
