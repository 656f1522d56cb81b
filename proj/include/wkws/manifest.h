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

#ifndef WKWS_MANIFEST_H_
#define WKWS_MANIFEST_H_

#include <filesystem>
#include <string>

#include "wkws/synth.h"

namespace wkws {

// JSON-Lines: one SampleRecord object per line, then a final
// {"config": {...}} line. Paths are stored relative to the manifest's
// directory and resolved against it on read.
std::string SerializeManifest(const DatasetManifest& manifest,
                              const std::filesystem::path& manifest_dir);
DatasetManifest ParseManifest(const std::string& text,
                              const std::filesystem::path& manifest_dir);

void WriteManifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);
DatasetManifest ReadManifest(const std::filesystem::path& path);

}  // namespace wkws

#endif  // WKWS_MANIFEST_H_
