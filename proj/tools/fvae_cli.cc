// Copyright 2026 The fvae Authors. All Rights Reserved.
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

// fvae: command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fvae/fvae.h"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int Report(fvae_status s) {
  if (s == FVAE_OK) return kExitOk;
  std::cerr << "fvae: " << fvae_last_error() << "\n";
  return s == FVAE_USAGE_ERROR ? kExitUsage : kExitFailure;
}

std::optional<std::string> ReadFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

bool HasSuffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Loads a WAV (normalised with the model's statistics) or a feature archive.
fvae_status LoadInput(fvae_model* model, const std::string& path, fvae_features** out) {
  if (HasSuffix(path, ".wav")) return fvae_features_from_wav(model, path.c_str(), out);
  return fvae_features_load(path.c_str(), out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factorized VAE voice conversion toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fvae_version()));

  // make-toy-corpus
  auto* toy = app.add_subcommand("make-toy-corpus", "Synthesize the toy corpus");
  std::string toy_out, toy_config;
  std::uint64_t toy_seed = 0;
  std::optional<int> toy_speakers, toy_phones, toy_utts;
  toy->add_option("--out", toy_out, "Output directory")->required();
  toy->add_option("--config", toy_config, "Toy corpus config (JSON file)")->check(CLI::ExistingFile);
  toy->add_option("--seed", toy_seed, "Generator seed");
  toy->add_option("--speakers", toy_speakers, "Number of speakers")->check(CLI::PositiveNumber);
  toy->add_option("--phones", toy_phones, "Number of phone classes")->check(CLI::PositiveNumber);
  toy->add_option("--utterances", toy_utts, "Utterances per speaker")->check(CLI::PositiveNumber);

  // fit-stats
  auto* fit = app.add_subcommand("fit-stats", "Fit global feature statistics on the training split");
  std::string fit_manifest, fit_out, fit_features;
  fit->add_option("--manifest", fit_manifest, "Manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Output statistics file")->required();
  fit->add_option("--features", fit_features, "Feature config (JSON file)")->check(CLI::ExistingFile);

  // train
  auto* train = app.add_subcommand("train", "Train a model");
  std::string tr_manifest, tr_out, tr_config, tr_stats, tr_mode;
  std::optional<long> tr_steps;
  std::optional<std::uint64_t> tr_seed;
  std::optional<int> tr_batch;
  bool tr_quiet = false, tr_dry = false;
  train->add_option("--manifest", tr_manifest, "Manifest (JSON lines)")->check(CLI::ExistingFile);
  train->add_option("--out", tr_out, "Model output directory");
  train->add_option("--config", tr_config, "Training config (JSON file)")->check(CLI::ExistingFile);
  train->add_option("--stats", tr_stats, "Precomputed feature statistics")->check(CLI::ExistingFile);
  train->add_option("--mode", tr_mode, "plain, bottleneck, adv_clf or adv_cpc")
      ->check(CLI::IsMember({"plain", "bottleneck", "adv_clf", "adv_cpc"}));
  auto* paired = train->add_flag("--paired,!--no-paired", "Speaker input from a different segment (X2 != X1)");
  auto* vtlp = train->add_flag("--vtlp,!--no-vtlp", "VTLP on the content encoder input");
  train->add_option("--steps", tr_steps, "Joint update steps")->check(CLI::PositiveNumber);
  train->add_option("--seed", tr_seed, "Random seed");
  train->add_option("--batch", tr_batch, "Batch size")->check(CLI::PositiveNumber);
  train->add_flag("--quiet", tr_quiet, "No progress output");
  train->add_flag("--dry-run", tr_dry, "Print the resolved config and exit");

  // convert
  auto* conv = app.add_subcommand("convert", "Voice conversion of one utterance");
  std::string cv_model, cv_source, cv_target, cv_out, cv_wav;
  int cv_iters = 32;
  conv->add_option("--model", cv_model, "Model directory")->required()->check(CLI::ExistingDirectory);
  conv->add_option("--source", cv_source, "Content source (.wav or feature archive)")->required()->check(CLI::ExistingFile);
  conv->add_option("--target", cv_target, "Target speaker (.wav or feature archive)")->required()->check(CLI::ExistingFile);
  conv->add_option("--out", cv_out, "Output feature archive")->required();
  conv->add_option("--wav", cv_wav, "Also resynthesize audio to this WAV");
  conv->add_option("--griffin-lim-iters", cv_iters, "Griffin-Lim iterations")->check(CLI::PositiveNumber);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Conversion metrics and post-hoc probes");
  std::string ev_model, ev_manifest, ev_probes, ev_out, ev_config;
  std::optional<std::uint64_t> ev_seed;
  bool ev_quiet = false;
  eval->add_option("--model", ev_model, "Model directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--manifest", ev_manifest, "Manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  eval->add_option("--probes-dir", ev_probes, "Oracle probe directory (created on demand)")->required();
  eval->add_option("--out", ev_out, "Report directory")->required();
  eval->add_option("--config", ev_config, "Evaluation config (JSON file)")->check(CLI::ExistingFile);
  eval->add_option("--seed", ev_seed, "Evaluation seed");
  eval->add_flag("--quiet", ev_quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto read_or_fail = [](const std::string& path, std::string& out) {
    if (path.empty()) return true;
    auto text = ReadFile(path);
    if (!text) {
      std::cerr << "fvae: cannot read " << path << "\n";
      return false;
    }
    out = *text;
    return true;
  };

  if (*toy) {
    std::string text = "{}";
    if (!read_or_fail(toy_config, text)) return kExitFailure;
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      std::cerr << "fvae: " << toy_config << " is not a JSON object\n";
      return kExitFailure;
    }
    if (toy_speakers) j["n_speakers"] = *toy_speakers;
    if (toy_phones) j["n_phones"] = *toy_phones;
    if (toy_utts) j["utterances_per_speaker"] = *toy_utts;
    return Report(fvae_make_toy_corpus(toy_out.c_str(), j.dump().c_str(), toy_seed));
  }

  if (*fit) {
    std::string text;
    if (!read_or_fail(fit_features, text)) return kExitFailure;
    const fvae_status s = fvae_fit_stats(fit_manifest.c_str(), text.empty() ? nullptr : text.c_str(),
                                         fit_out.c_str());
    return Report(s);
  }

  if (*train) {
    std::string config_text;
    if (!read_or_fail(tr_config, config_text)) return kExitFailure;
    json overrides = json::object();
    if (!tr_mode.empty()) overrides["mode"] = tr_mode;
    if (paired->count() > 0) overrides["paired"] = paired->as<bool>();
    if (vtlp->count() > 0) overrides["vtlp"] = vtlp->as<bool>();
    if (tr_steps) overrides["steps"] = *tr_steps;
    if (tr_seed) overrides["seed"] = *tr_seed;
    if (tr_batch) overrides["batch"] = *tr_batch;

    char* resolved = nullptr;
    fvae_status s = fvae_resolve_train_config(config_text.empty() ? nullptr : config_text.c_str(),
                                              overrides.dump().c_str(), &resolved);
    if (s != FVAE_OK) return Report(s);
    const json cfg = json::parse(resolved);
    fvae_string_free(resolved);
    if (cfg["mode"] == "bottleneck" && cfg["paired"].get<bool>()) {
      std::cerr << "fvae: --mode bottleneck uses X2 = X1; --paired is not allowed\n"
                << train->help();
      return kExitUsage;
    }
    if (tr_dry) {
      std::cout << cfg.dump(2) << "\n";
      return kExitOk;
    }
    if (tr_manifest.empty() || tr_out.empty()) {
      std::cerr << "fvae: train needs --manifest and --out\n" << train->help();
      return kExitUsage;
    }
    s = fvae_train(config_text.empty() ? nullptr : config_text.c_str(), overrides.dump().c_str(),
                   tr_manifest.c_str(), tr_stats.empty() ? nullptr : tr_stats.c_str(),
                   tr_out.c_str(), tr_quiet ? 0 : 1);
    return Report(s);
  }

  if (*conv) {
    fvae_model* model = nullptr;
    fvae_status s = fvae_model_load(cv_model.c_str(), &model);
    if (s != FVAE_OK) return Report(s);
    fvae_features *src = nullptr, *tgt = nullptr, *out = nullptr;
    if ((s = LoadInput(model, cv_source, &src)) == FVAE_OK &&
        (s = LoadInput(model, cv_target, &tgt)) == FVAE_OK &&
        (s = fvae_convert(model, src, tgt, &out)) == FVAE_OK &&
        (s = fvae_features_save(out, cv_out.c_str())) == FVAE_OK && !cv_wav.empty()) {
      s = fvae_invert_to_wav(model, out, cv_wav.c_str(), cv_iters);
    }
    fvae_features_free(out);
    fvae_features_free(tgt);
    fvae_features_free(src);
    fvae_model_free(model);
    return Report(s);
  }

  if (*eval) {
    std::string text = "{}";
    if (!read_or_fail(ev_config, text)) return kExitFailure;
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      std::cerr << "fvae: " << ev_config << " is not a JSON object\n";
      return kExitFailure;
    }
    if (ev_seed) j["seed"] = *ev_seed;
    return Report(fvae_evaluate(ev_model.c_str(), ev_manifest.c_str(), ev_probes.c_str(),
                                j.dump().c_str(), ev_out.c_str(), ev_quiet ? 0 : 1));
  }
  return kExitUsage;
}
