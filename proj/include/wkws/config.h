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

#ifndef WKWS_CONFIG_H_
#define WKWS_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>

namespace wkws {

// Flat "key = value" text. Blank lines and lines starting with '#' are
// ignored; later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues ParseKeyValues(const std::string& text);
KeyValues ReadKeyValueFile(const std::filesystem::path& path);
std::string FormatKeyValues(const KeyValues& kv);

}  // namespace wkws

#endif  // WKWS_CONFIG_H_
