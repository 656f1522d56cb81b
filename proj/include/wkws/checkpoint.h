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

#ifndef WKWS_CHECKPOINT_H_
#define WKWS_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wkws/model.h"

namespace wkws {

inline constexpr uint16_t kCheckpointVersion = 1;

// Binary layout, little-endian: "WKWS", u16 version, u32 tensor count;
// per tensor: u16 name length, UTF-8 name, u8 rank, u32 dims, float32
// data. Tensors appear in ForEachTensor order, running statistics
// included. The architecture is recovered from the tensor shapes.
std::vector<unsigned char> SaveCheckpoint(const ModelParams& params);
ModelParams LoadCheckpoint(std::span<const unsigned char> bytes);

void SaveCheckpointFile(const ModelParams& params,
                        const std::filesystem::path& path);
ModelParams LoadCheckpointFile(const std::filesystem::path& path);

}  // namespace wkws

#endif  // WKWS_CHECKPOINT_H_
