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

#include "wkws/checkpoint.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include "wkws/error.h"

namespace wkws {
namespace {

class Writer {
 public:
  void Bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    out_.insert(out_.end(), c, c + n);
  }
  void U8(uint8_t v) { out_.push_back(v); }
  void U16(uint16_t v) {
    U8(v & 0xFF);
    U8(v >> 8);
  }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) U8((v >> (8 * i)) & 0xFF);
  }
  void F32(float f) {
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    U32(bits);
  }
  std::vector<unsigned char> Take() { return std::move(out_); }

 private:
  std::vector<unsigned char> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> in) : in_(in) {}
  void Need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw FormatError("checkpoint is truncated");
  }
  uint8_t U8() {
    Need(1);
    return in_[pos_++];
  }
  uint16_t U16() {
    const uint16_t lo = U8();
    return static_cast<uint16_t>(lo | (U8() << 8));
  }
  uint32_t U32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(U8()) << (8 * i);
    return v;
  }
  float F32() {
    const uint32_t bits = U32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
  std::string Str(std::size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  std::span<const unsigned char> in_;
  std::size_t pos_ = 0;
};

const Tensor<float>& Find(const std::map<std::string, Tensor<float>>& m,
                          const std::string& name, std::size_t rank) {
  auto it = m.find(name);
  if (it == m.end()) throw FormatError("checkpoint lacks tensor " + name);
  if (it->second.shape.size() != rank) {
    throw FormatError("tensor " + name + " has rank " +
                      std::to_string(it->second.shape.size()));
  }
  return it->second;
}

ModelConfig InferConfig(const std::map<std::string, Tensor<float>>& m) {
  ModelConfig cfg;
  const auto& stem = Find(m, "stem.weight", 3);
  cfg.stem_channels = stem.shape[0];
  cfg.n_mels = stem.shape[1];
  cfg.stem_kernel = stem.shape[2];
  cfg.block_channels.clear();
  for (int i = 0;; ++i) {
    auto it = m.find("block" + std::to_string(i) + ".conv1.weight");
    if (it == m.end()) break;
    if (it->second.shape.size() != 3) throw FormatError("bad block weight rank");
    cfg.block_channels.push_back(it->second.shape[0]);
    cfg.block_kernel = it->second.shape[2];
  }
  if (cfg.block_channels.empty()) throw FormatError("checkpoint has no blocks");
  cfg.n_classes = Find(m, "fc.weight", 2).shape[0];
  return cfg;
}

}  // namespace

std::vector<unsigned char> SaveCheckpoint(const ModelParams& params) {
  Writer w;
  w.Bytes("WKWS", 4);
  w.U16(kCheckpointVersion);
  uint32_t count = 0;
  ForEachTensor<float>(params, [&](const TensorInfo&, const Tensor<float>&) { ++count; });
  w.U32(count);
  ForEachTensor<float>(params, [&](const TensorInfo& info, const Tensor<float>& t) {
    w.U16(static_cast<uint16_t>(info.name.size()));
    w.Bytes(info.name.data(), info.name.size());
    w.U8(static_cast<uint8_t>(t.shape.size()));
    for (int d : t.shape) w.U32(static_cast<uint32_t>(d));
    for (float v : t.data) w.F32(v);
  });
  return w.Take();
}

ModelParams LoadCheckpoint(std::span<const unsigned char> bytes) {
  Reader r(bytes);
  if (r.Str(4) != "WKWS") throw FormatError("bad checkpoint magic");
  const uint16_t version = r.U16();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t count = r.U32();
  std::map<std::string, Tensor<float>> tensors;
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = r.Str(r.U16());
    Tensor<float> t;
    const uint8_t rank = r.U8();
    std::size_t n = 1;
    for (uint8_t d = 0; d < rank; ++d) {
      t.shape.push_back(static_cast<int>(r.U32()));
      n *= static_cast<std::size_t>(t.shape.back());
    }
    r.Need(n * 4);
    t.data.resize(n);
    for (float& v : t.data) v = r.F32();
    if (!tensors.emplace(name, std::move(t)).second) {
      throw FormatError("duplicate tensor " + name);
    }
  }
  if (!r.AtEnd()) throw FormatError("trailing bytes after checkpoint");

  ModelParams params = MakeParams<float>(InferConfig(tensors));
  std::size_t expected = 0;
  ForEachTensor<float>(params, [&](const TensorInfo& info, Tensor<float>& t) {
    ++expected;
    auto it = tensors.find(info.name);
    if (it == tensors.end()) throw FormatError("checkpoint lacks tensor " + info.name);
    if (it->second.shape != t.shape) {
      throw FormatError("shape mismatch for tensor " + info.name);
    }
    t.data = std::move(it->second.data);
  });
  if (expected != tensors.size()) {
    throw FormatError("checkpoint has unexpected extra tensors");
  }
  return params;
}

void SaveCheckpointFile(const ModelParams& params,
                        const std::filesystem::path& path) {
  const auto bytes = SaveCheckpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ModelParams LoadCheckpointFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return LoadCheckpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace wkws
