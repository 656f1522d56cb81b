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

#include "wkws/cli.h"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wkws/checkpoint.h"
#include "wkws/config.h"
#include "wkws/error.h"
#include "wkws/features.h"
#include "wkws/manifest.h"
#include "wkws/micro_corpus.h"
#include "wkws/parallel.h"
#include "wkws/train.h"

namespace wkws {
namespace fs = std::filesystem;

namespace {

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Hex(uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

void LogManifestHash(const fs::path& path) {
  std::cerr << "manifest " << path.string() << " fnv1a " << Hex(Fnv1a(ReadText(path)))
            << "\n";
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename Fn>
auto Stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("smoke stage ") + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(std::string("smoke stage ") + name + ": " + e.what());
  }
}

struct SynthArgs {
  std::string variant = "weak";
  double duration = 3.0;
  std::optional<double> snr;
  std::string keywords, noise, out;
  uint64_t seed = 0;
  int rate = 16000;
  int jobs = DefaultJobs();
  bool lenient = false;
};

struct TrainArgs {
  std::string config;
  KeyValues overrides;
};

struct EvalArgs {
  std::string model, manifest, report, roc;
  int jobs = DefaultJobs();
  int batch_size = 64;
};

void RunSynth(const SynthArgs& a) {
  SynthConfig cfg;
  cfg.variant = ParseVariant(a.variant);
  cfg.target_seconds = a.duration;
  cfg.snr_db = a.snr;
  cfg.sample_rate = a.rate;
  cfg.seed = a.seed;
  cfg.keyword_dir = a.keywords;
  cfg.noise_dir = a.noise;
  cfg.out_dir = a.out;
  cfg.strict = !a.lenient;
  cfg.jobs = a.jobs;
  cfg.Validate();
  if (cfg.variant != Variant::kClean && a.noise.empty()) {
    throw ValidationError("--noise is required for variant " + a.variant);
  }
  const auto keywords = ScanKeywordCorpus(cfg.keyword_dir);
  std::vector<fs::path> noise;
  if (!a.noise.empty()) noise = ScanNoiseCorpus(cfg.noise_dir);
  const DatasetManifest m = BuildDataset(cfg, keywords, noise);
  std::cerr << "synthesized " << m.records.size() << " records\n";
  LogManifestHash(cfg.out_dir / "manifest.jsonl");
}

void RunEval(const EvalArgs& a) {
  const ModelParams params = LoadCheckpointFile(a.model);
  const DatasetManifest manifest = ReadManifest(a.manifest);
  EvalOptions opts;
  opts.jobs = a.jobs;
  opts.batch_size = a.batch_size;
  opts.base_dir = fs::path(a.manifest).has_parent_path() ? fs::path(a.manifest).parent_path()
                                                         : fs::path(".");
  const EvalReport report = Evaluate(params, manifest, opts);
  WriteText(a.report, ReportToJson(report));
  if (!a.roc.empty()) WriteText(a.roc, RocToCsv(report));
  std::cerr << "accuracy " << report.accuracy << " mAP " << report.map << " macro AUC "
            << report.macro_auc << " over " << report.clips.size() << " clips\n";
}

}  // namespace

uint64_t Fnv1a(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EvalReport EndToEndSmoke(const SmokeOptions& o) {
  if (o.out_dir.empty()) throw ValidationError("smoke needs an output directory");
  const fs::path corpus = o.out_dir / "corpus";
  const fs::path noise_dir = o.out_dir / "noise";
  const fs::path data = o.out_dir / "data";
  const fs::path train_dir = o.out_dir / "train";

  Stage("corpus", [&] {
    MicroCorpusOptions mc;
    mc.seed = o.seed;
    WriteMicroCorpus(corpus, mc);
  });
  Stage("noise", [&] {
    fs::create_directories(noise_dir);
    SaveWav(GenNoise(NoiseKind::kWhite, 4.0, 16000, DeriveSeed(o.seed, 1)),
            noise_dir / "white.wav");
    SaveWav(GenNoise(NoiseKind::kPink, 4.0, 16000, DeriveSeed(o.seed, 2)),
            noise_dir / "pink.wav");
  });
  Stage("synth", [&] {
    SynthConfig cfg;
    cfg.variant = o.variant;
    cfg.target_seconds = o.variant == Variant::kClean ? 1.0 : o.duration_seconds;
    cfg.snr_db = o.snr_db;
    cfg.seed = o.seed;
    cfg.keyword_dir = corpus;
    cfg.noise_dir = noise_dir;
    cfg.out_dir = data;
    cfg.jobs = o.jobs;
    BuildDataset(cfg, ScanKeywordCorpus(corpus), ScanNoiseCorpus(noise_dir));
    LogManifestHash(data / "manifest.jsonl");
  });
  const TrainResult trained = Stage("train", [&] {
    TrainConfig tc;
    tc.batch_size = 16;
    tc.max_epochs = o.epochs;
    tc.crop_seconds = 1.0;
    tc.seed = o.seed;
    tc.train_manifest = data / "train.jsonl";
    tc.val_manifest = data / "validation.jsonl";
    tc.out_dir = train_dir;
    tc.model.stem_channels = 8;
    tc.model.block_channels = {12, 16, 24};
    tc.jobs = o.jobs;
    return RunTraining(tc);
  });
  return Stage("eval", [&] {
    EvalOptions opts;
    opts.jobs = o.jobs;
    opts.base_dir = data;
    const EvalReport report =
        Evaluate(trained.averaged, ReadManifest(data / "test.jsonl"), opts);
    WriteText(o.out_dir / "report.json", ReportToJson(report));
    WriteText(o.out_dir / "roc.csv", RocToCsv(report));
    return report;
  });
}

int RunCli(const std::vector<std::string>& args) {
  CLI::App app{"Weakly labeled keyword spotting toolkit", "wkws"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print toolkit and format versions");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a dataset variant");
  synth_cmd->add_option("--variant", synth.variant, "clean | weak | weak_snr | weak_pos")
      ->check(CLI::IsMember({"clean", "weak", "weak_snr", "weak_pos"}));
  synth_cmd->add_option("--duration", synth.duration, "Target clip length in seconds");
  synth_cmd->add_option("--snr", synth.snr, "SNR in dB (weak_snr only)");
  synth_cmd->add_option("--keywords", synth.keywords, "Keyword corpus directory")->required();
  synth_cmd->add_option("--noise", synth.noise, "Noise corpus directory");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--rate", synth.rate, "Output sample rate");
  synth_cmd->add_option("--jobs", synth.jobs, "Worker threads");
  synth_cmd->add_flag("--lenient", synth.lenient, "Skip bad records instead of aborting");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train on a synthesized dataset");
  train_cmd->add_option("--config", train.config, "key=value config file");
  const std::vector<std::pair<std::string, std::string>> train_flags = {
      {"--batch-size", "batch_size"},         {"--max-epochs", "max_epochs"},
      {"--lr", "lr"},                         {"--crop-seconds", "crop_seconds"},
      {"--seed", "seed"},                     {"--topk-average", "topk_average"},
      {"--train-manifest", "train_manifest"}, {"--val-manifest", "val_manifest"},
      {"--out", "out_dir"},                   {"--jobs", "jobs"},
      {"--stem-channels", "stem_channels"},   {"--block-channels", "block_channels"}};
  for (const auto& [flag, key] : train_flags) {
    train_cmd->add_option_function<std::string>(
        flag, [&train, key = key](const std::string& v) { train.overrides[key] = v; },
        "Overrides config key " + key);
  }

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a test manifest");
  eval_cmd->add_option("--model", eval.model, "Checkpoint file")->required();
  eval_cmd->add_option("--manifest", eval.manifest, "Test manifest (JSONL)")->required();
  eval_cmd->add_option("--report", eval.report, "Report JSON output")->required();
  eval_cmd->add_option("--roc", eval.roc, "Optional ROC CSV output");
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads");
  eval_cmd->add_option("--batch-size", eval.batch_size, "Scoring batch size");

  std::string roc_report, roc_out;
  auto* roc_cmd = app.add_subcommand("roc-export", "Write ROC points of a report as CSV");
  roc_cmd->add_option("--report", roc_report, "Report JSON")->required();
  roc_cmd->add_option("--out", roc_out, "CSV output")->required();

  std::string dump_wav, dump_out;
  auto* dump_cmd = app.add_subcommand("features-dump", "Write a log-mel spectrogram as CSV");
  dump_cmd->add_option("--wav", dump_wav, "Input WAV")->required();
  dump_cmd->add_option("--out", dump_out, "CSV output (rows = frames)")->required();

  std::string noise_kind = "white", noise_out;
  double noise_seconds = 10.0;
  int noise_rate = 16000;
  uint64_t noise_seed = 0;
  auto* noise_cmd = app.add_subcommand("gen-noise", "Generate white or pink noise");
  noise_cmd->add_option("--kind", noise_kind, "white | pink")
      ->check(CLI::IsMember({"white", "pink"}));
  noise_cmd->add_option("--seconds", noise_seconds, "Duration");
  noise_cmd->add_option("--rate", noise_rate, "Sample rate");
  noise_cmd->add_option("--seed", noise_seed, "Random seed");
  noise_cmd->add_option("--out", noise_out, "Output WAV")->required();

  SmokeOptions smoke;
  std::string smoke_variant = "weak", smoke_out;
  auto* smoke_cmd = app.add_subcommand("smoke", "End-to-end run on bundled synthetic data");
  smoke_cmd->add_option("--out", smoke_out, "Output directory")->required();
  smoke_cmd->add_option("--seed", smoke.seed, "Random seed");
  smoke_cmd->add_option("--variant", smoke_variant, "Dataset variant")
      ->check(CLI::IsMember({"clean", "weak", "weak_snr", "weak_pos"}));
  smoke_cmd->add_option("--snr", smoke.snr_db, "SNR in dB (weak_snr only)");
  smoke_cmd->add_option("--duration", smoke.duration_seconds, "Target clip length");
  smoke_cmd->add_option("--epochs", smoke.epochs, "Training epochs");
  smoke_cmd->add_option("--jobs", smoke.jobs, "Worker threads");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  if (show_version) {
    std::cout << "wkws " << kToolkitVersion << " (checkpoint format "
              << kCheckpointVersion << ", manifest jsonl 1)\n";
    return 0;
  }

  try {
    if (synth_cmd->parsed()) {
      RunSynth(synth);
    } else if (train_cmd->parsed()) {
      TrainConfig cfg;
      if (!train.config.empty()) {
        cfg.Apply(ReadKeyValueFile(train.config), fs::path(train.config).parent_path());
      }
      cfg.Apply(train.overrides);
      if (cfg.train_manifest.empty() || cfg.val_manifest.empty() || cfg.out_dir.empty()) {
        throw ValidationError("train needs train_manifest, val_manifest and out_dir");
      }
      const TrainResult r = RunTraining(cfg);
      std::cerr << "best validation accuracy "
                << (r.ledger.entries().empty() ? 0.0 : r.ledger.entries()[0].val_accuracy)
                << "; averaged model at " << (cfg.out_dir / "avg.wkws").string() << "\n";
    } else if (eval_cmd->parsed()) {
      RunEval(eval);
    } else if (roc_cmd->parsed()) {
      WriteText(roc_out, RocToCsv(ReportFromJson(ReadText(roc_report))));
    } else if (dump_cmd->parsed()) {
      const LogMelSpectrogram lms = LogMel(LoadClipForFeatures(dump_wav));
      std::string csv;
      for (int t = 0; t < lms.frames; ++t) {
        for (int m = 0; m < lms.bins; ++m) {
          if (m) csv += ',';
          csv += FormatDouble(lms.at(t, m));
        }
        csv += '\n';
      }
      WriteText(dump_out, csv);
    } else if (noise_cmd->parsed()) {
      SaveWav(GenNoise(ParseNoiseKind(noise_kind), noise_seconds, noise_rate, noise_seed),
              noise_out);
    } else if (smoke_cmd->parsed()) {
      smoke.out_dir = smoke_out;
      smoke.variant = ParseVariant(smoke_variant);
      const EvalReport r = EndToEndSmoke(smoke);
      std::cerr << "smoke accuracy " << r.accuracy << " mAP " << r.map << "\n";
    } else {
      std::cerr << app.help();
      return 1;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int RunCli(int argc, char** argv) {
  return RunCli(std::vector<std::string>(argv, argv + argc));
}

}  // namespace wkws
