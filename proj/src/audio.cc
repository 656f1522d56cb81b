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

#include "wkws/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "wkws/error.h"

namespace wkws {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t ReadU16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t ReadU32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void PutU16(std::vector<unsigned char>& out, uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}

void PutU32(std::vector<unsigned char>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void PutTag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

double BesselI0(double x) { return std::cyl_bessel_i(0.0, x); }

}  // namespace

AudioClip DecodeWav(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DecodeError("not a RIFF/WAVE file");
  }
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        throw DecodeError("truncated fmt chunk");
      }
      format = ReadU16(chunk + 8);
      channels = ReadU16(chunk + 10);
      rate = ReadU32(chunk + 12);
      bits = ReadU16(chunk + 22);
      if (format == kFormatExtensible && size >= 40) {
        // Sub-format GUID starts with the plain format tag.
        format = ReadU16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > bytes.size()) {
        throw DecodeError("truncated data chunk: header says " +
                          std::to_string(size) + " bytes, " +
                          std::to_string(bytes.size() - body) + " present");
      }
      data = chunk + 8;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw DecodeError("missing fmt chunk");
  if (data == nullptr) throw DecodeError("missing data chunk");
  if (channels == 0 || rate == 0) throw DecodeError("zero channels or rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw UnsupportedFormatError("unsupported WAV encoding: format " +
                                 std::to_string(format) + ", " +
                                 std::to_string(bits) + " bits");
  }
  const std::size_t frame_bytes = std::size_t{channels} * (bits / 8);
  if (data_size % frame_bytes != 0) {
    throw DecodeError("data chunk is not a whole number of frames");
  }
  const std::size_t frames = data_size / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * (bits / 8);
      if (pcm16) {
        sum += static_cast<int16_t>(ReadU16(p)) / 32768.0;
      } else {
        const uint32_t raw = ReadU32(p);
        float v;
        std::memcpy(&v, &raw, sizeof v);
        sum += v;
      }
    }
    clip.samples[i] = static_cast<float>(sum / channels);
  }
  return clip;
}

AudioClip LoadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return DecodeWav(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  } catch (const UnsupportedFormatError& e) {
    throw UnsupportedFormatError(path.string() + ": " + e.what());
  }
}

std::vector<unsigned char> EncodeWav(const AudioClip& clip) {
  if (clip.empty()) throw DomainError("cannot write an empty clip");
  const uint32_t data_size = static_cast<uint32_t>(clip.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_size);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, 1);
  PutU32(out, static_cast<uint32_t>(clip.sample_rate));
  PutU32(out, static_cast<uint32_t>(clip.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  PutTag(out, "data");
  PutU32(out, data_size);
  for (float s : clip.samples) {
    const long q = std::lround(static_cast<double>(s) * 32768.0);
    PutU16(out, static_cast<uint16_t>(
                    static_cast<int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  return out;
}

void SaveWav(const AudioClip& clip, const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = EncodeWav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

AudioClip Resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw DomainError("target rate must be positive");
  if (clip.sample_rate <= 0) throw DomainError("source rate must be positive");
  if (target_rate == clip.sample_rate) return clip;

  constexpr int kTaps = 64;
  constexpr int kHalf = kTaps / 2;
  constexpr double kBeta = 8.6;

  const long g = std::gcd(static_cast<long>(target_rate),
                          static_cast<long>(clip.sample_rate));
  const long up = target_rate / g;
  const long down = clip.sample_rate / g;
  // Cutoff relative to the input Nyquist.
  const double cutoff = std::min(1.0, static_cast<double>(up) / down);

  // Output n sits at input position n*down/up = base + phase/up. Taps cover
  // input samples base-kHalf+1 .. base+kHalf.
  std::vector<double> table(static_cast<std::size_t>(up) * kTaps);
  const double i0_beta = BesselI0(kBeta);
  for (long phase = 0; phase < up; ++phase) {
    const double frac = static_cast<double>(phase) / up;
    double* w = table.data() + phase * kTaps;
    double sum = 0.0;
    for (int k = 0; k < kTaps; ++k) {
      const double dist = (k - kHalf + 1) - frac;
      const double x = cutoff * dist;
      const double sinc =
          x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
      const double r = dist / kHalf;
      const double win =
          std::abs(r) >= 1.0
              ? 0.0
              : BesselI0(kBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      w[k] = cutoff * sinc * win;
      sum += w[k];
    }
    for (int k = 0; k < kTaps; ++k) w[k] /= sum;
  }

  const auto in_len = static_cast<long>(clip.size());
  const long out_len = std::lround(static_cast<double>(in_len) * up / down);
  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(out_len));
  for (long n = 0; n < out_len; ++n) {
    const long num = n * down;
    const long base = num / up;
    const long phase = num % up;
    const double* w = table.data() + phase * kTaps;
    double acc = 0.0;
    for (int k = 0; k < kTaps; ++k) {
      const long idx = base - kHalf + 1 + k;
      if (idx >= 0 && idx < in_len) acc += w[k] * clip.samples[idx];
    }
    out.samples[n] = static_cast<float>(acc);
  }
  return out;
}

double RmsPower(const std::vector<float>& samples, std::size_t begin,
                std::size_t end) {
  if (end <= begin || end > samples.size()) {
    throw DomainError("power of an empty or out-of-range interval");
  }
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    acc += static_cast<double>(samples[i]) * samples[i];
  }
  return acc / static_cast<double>(end - begin);
}

double RmsPower(const AudioClip& clip) {
  if (clip.empty()) throw DomainError("power of an empty clip");
  return RmsPower(clip.samples, 0, clip.size());
}

}  // namespace wkws
