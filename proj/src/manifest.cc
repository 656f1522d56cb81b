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

#include "wkws/manifest.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wkws/error.h"

namespace wkws {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string Rel(const fs::path& p, const fs::path& base) {
  if (p.empty()) return "";
  const fs::path abs = fs::absolute(p).lexically_normal();
  const fs::path abs_base = fs::absolute(base).lexically_normal();
  fs::path rel = abs.lexically_relative(abs_base);
  if (rel.empty()) rel = abs;
  return rel.generic_string();
}

fs::path Resolve(const std::string& s, const fs::path& base) {
  if (s.empty()) return {};
  const fs::path p(s);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

ordered_json ConfigToJson(const SynthConfig& c, const fs::path& base) {
  ordered_json j;
  j["variant"] = std::string(ToString(c.variant));
  j["target_seconds"] = c.target_seconds;
  j["snr_db"] = c.snr_db ? ordered_json(*c.snr_db) : ordered_json(nullptr);
  j["sample_rate"] = c.sample_rate;
  j["seed"] = c.seed;
  j["keyword_dir"] = Rel(c.keyword_dir, base);
  j["noise_dir"] = Rel(c.noise_dir, base);
  j["out_dir"] = Rel(c.out_dir, base);
  return j;
}

SynthConfig ConfigFromJson(const ordered_json& j, const fs::path& base) {
  SynthConfig c;
  c.variant = ParseVariant(j.at("variant").get<std::string>());
  c.target_seconds = j.at("target_seconds").get<double>();
  if (!j.at("snr_db").is_null()) c.snr_db = j.at("snr_db").get<double>();
  c.sample_rate = j.at("sample_rate").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  c.keyword_dir = Resolve(j.value("keyword_dir", ""), base);
  c.noise_dir = Resolve(j.value("noise_dir", ""), base);
  c.out_dir = Resolve(j.value("out_dir", ""), base);
  return c;
}

ordered_json RecordToJson(const SampleRecord& r, const fs::path& base) {
  ordered_json j;
  j["out_path"] = Rel(r.out_path, base);
  j["label"] = r.label;
  j["split"] = std::string(ToString(r.split));
  j["source_keyword"] = Rel(r.source_keyword, base);
  j["source_noise"] = r.source_noise ? ordered_json(Rel(*r.source_noise, base))
                                     : ordered_json(nullptr);
  j["offset_samples"] = r.offset_samples;
  j["snr_db"] = r.snr_db ? ordered_json(*r.snr_db) : ordered_json(nullptr);
  j["seed"] = r.seed;
  if (r.noise_start_samples) j["noise_start_samples"] = *r.noise_start_samples;
  if (r.noise_gain) j["noise_gain"] = *r.noise_gain;
  return j;
}

SampleRecord RecordFromJson(const ordered_json& j, const fs::path& base) {
  SampleRecord r;
  r.out_path = Resolve(j.at("out_path").get<std::string>(), base);
  r.label = j.at("label").get<int>();
  r.split = ParseSplit(j.at("split").get<std::string>());
  r.source_keyword = Resolve(j.at("source_keyword").get<std::string>(), base);
  if (j.contains("source_noise") && !j["source_noise"].is_null()) {
    r.source_noise = Resolve(j["source_noise"].get<std::string>(), base);
  }
  r.offset_samples = j.at("offset_samples").get<int64_t>();
  if (j.contains("snr_db") && !j["snr_db"].is_null()) {
    r.snr_db = j["snr_db"].get<double>();
  }
  r.seed = j.at("seed").get<uint64_t>();
  if (j.contains("noise_start_samples")) {
    r.noise_start_samples = j["noise_start_samples"].get<int64_t>();
  }
  if (j.contains("noise_gain")) r.noise_gain = j["noise_gain"].get<double>();
  if (r.label < 0 || r.label >= kNumClasses) {
    throw FormatError("label out of range: " + std::to_string(r.label));
  }
  if (r.offset_samples < 0) throw FormatError("negative offset_samples");
  return r;
}

}  // namespace

std::string SerializeManifest(const DatasetManifest& manifest,
                              const fs::path& manifest_dir) {
  std::string out;
  for (const auto& r : manifest.records) {
    out += RecordToJson(r, manifest_dir).dump();
    out += '\n';
  }
  ordered_json tail;
  tail["config"] = ConfigToJson(manifest.config, manifest_dir);
  out += tail.dump();
  out += '\n';
  return out;
}

DatasetManifest ParseManifest(const std::string& text,
                              const fs::path& manifest_dir) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_config = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const ordered_json j = ordered_json::parse(line);
      if (j.contains("config")) {
        m.config = ConfigFromJson(j["config"], manifest_dir);
        have_config = true;
      } else {
        m.records.push_back(RecordFromJson(j, manifest_dir));
      }
    } catch (const ordered_json::exception& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const ValidationError& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (!have_config) throw FormatError("manifest has no config line");
  return m;
}

void WriteManifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : ".";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << SerializeManifest(manifest, dir);
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest ReadManifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path dir = path.has_parent_path() ? path.parent_path() : ".";
  return ParseManifest(ss.str(), dir);
}

}  // namespace wkws
