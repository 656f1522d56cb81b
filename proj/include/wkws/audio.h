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

#ifndef WKWS_AUDIO_H_
#define WKWS_AUDIO_H_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace wkws {

// Mono clip. Samples are nominally in [-1, 1]; values outside that range
// are kept in memory and only clamped when written to disk.
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads RIFF/WAVE with PCM16 or IEEE float32 samples and any channel count.
// Channels are averaged to mono.
AudioClip LoadWav(const std::filesystem::path& path);

// Decodes an in-memory WAV image; LoadWav is a thin wrapper over this.
AudioClip DecodeWav(const std::vector<unsigned char>& bytes);

// Writes PCM16 little-endian mono, saturating at full scale.
void SaveWav(const AudioClip& clip, const std::filesystem::path& path);
std::vector<unsigned char> EncodeWav(const AudioClip& clip);

// Polyphase windowed-sinc resampler (Kaiser beta 8.6, 64 taps per phase).
// Returns an exact copy when the rates already match.
AudioClip Resample(const AudioClip& clip, int target_rate);

// Mean squared amplitude.
double RmsPower(const AudioClip& clip);

// Mean squared amplitude of samples[begin, end).
double RmsPower(const std::vector<float>& samples, std::size_t begin,
                std::size_t end);

}  // namespace wkws

#endif  // WKWS_AUDIO_H_
