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

#include "fvae/fvae.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <new>
#include <string>

#include "fvae/corpus.hpp"
#include "fvae/error.hpp"
#include "fvae/evaluation.hpp"
#include "fvae/io.hpp"
#include "fvae/trainer.hpp"
#include "json.hpp"

struct fvae_model {
  fvae::ModelBundle bundle;
  std::string dir;
};

struct fvae_features {
  fvae::FeatureArchive archive;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

template <typename F>
fvae_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return FVAE_OK;
  } catch (const fvae::Error& e) {
    g_last_error = e.what();
    return static_cast<fvae_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("FormatError: ") + e.what();
    return FVAE_FORMAT_ERROR;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = std::string("IoError: ") + e.what();
    return FVAE_IO_ERROR;
  } catch (const std::bad_alloc&) {
    g_last_error = "Internal: out of memory";
    return FVAE_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
    return FVAE_INTERNAL;
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) fvae::Fail(fvae::ErrorCode::kUsageError, std::string(what) + " is NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json ParseObject(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text, nullptr, false);
  FVAE_CHECK(!j.is_discarded() && j.is_object(), fvae::ErrorCode::kFormatError,
             std::string(what) + " is not a JSON object");
  return j;
}

fvae::TrainConfig ResolveConfig(const char* config_json, const char* overrides_json) {
  const json overrides = ParseObject(overrides_json, "overrides");
  std::optional<fvae::TrainMode> mode;
  if (overrides.contains("mode")) mode = fvae::ParseTrainMode(overrides["mode"].get<std::string>());
  std::string text;
  if (config_json != nullptr && *config_json != '\0') text = config_json;
  fvae::TrainConfig cfg = fvae::ResolveTrainConfig(text.empty() ? nullptr : &text, mode);
  json rest = overrides;
  rest.erase("mode");
  if (!rest.empty()) {
    cfg = fvae::TrainConfig::FromJson(rest.dump(), cfg);
    fvae::ApplyModeConstraints(cfg);
  }
  return cfg;
}

fvae::ToyCorpusConfig ToyConfigFromJson(const json& j, std::uint64_t* split_seed) {
  fvae::ToyCorpusConfig c;
  c.n_speakers = j.value("n_speakers", c.n_speakers);
  c.n_phones = j.value("n_phones", c.n_phones);
  c.utterances_per_speaker = j.value("utterances_per_speaker", c.utterances_per_speaker);
  c.min_duration = j.value("min_duration", c.min_duration);
  c.max_duration = j.value("max_duration", c.max_duration);
  c.phone_min = j.value("phone_min", c.phone_min);
  c.phone_max = j.value("phone_max", c.phone_max);
  if (j.contains("sequence_seed")) c.sequence_seed = j["sequence_seed"].get<std::uint64_t>();
  *split_seed = j.value("split_seed", *split_seed);
  return c;
}

json ToyConfigToJson(const fvae::ToyCorpusConfig& c, std::uint64_t seed, std::uint64_t split_seed) {
  json j = {{"n_speakers", c.n_speakers},
            {"n_phones", c.n_phones},
            {"utterances_per_speaker", c.utterances_per_speaker},
            {"min_duration", c.min_duration},
            {"max_duration", c.max_duration},
            {"phone_min", c.phone_min},
            {"phone_max", c.phone_max},
            {"seed", seed},
            {"split_seed", split_seed}};
  if (c.sequence_seed) j["sequence_seed"] = *c.sequence_seed;
  return j;
}

fvae::MelSpectrogram GlobalNormalized(const fvae_model* m, const fvae_features* f) {
  const fvae::MelSpectrogram& x = f->archive.features;
  FVAE_CHECK(x.norm_state != fvae::NormState::kInstance, fvae::ErrorCode::kConfigError,
             "instance-normalised features cannot be converted");
  FVAE_CHECK(x.bands() == m->bundle.config.n_mels, fvae::ErrorCode::kShapeError,
             "feature band count differs from the model");
  return x.norm_state == fvae::NormState::kRaw ? fvae::ApplyGlobalNorm(x, m->bundle.stats) : x;
}

}  // namespace

extern "C" {

const char* fvae_version(void) { return "0.1.0"; }

const char* fvae_status_string(fvae_status status) {
  return fvae::ErrorCodeName(static_cast<fvae::ErrorCode>(status));
}

const char* fvae_last_error(void) { return g_last_error.c_str(); }

void fvae_string_free(char* s) { std::free(s); }

fvae_status fvae_vtlp_warp_frequency(double f, double alpha, double f_hi, double f_max,
                                     double* out) {
  return Guard([&] {
    Require(out, "out");
    *out = fvae::VtlpWarpFrequency(f, alpha, f_hi, f_max);
  });
}

fvae_status fvae_make_toy_corpus(const char* out_dir, const char* config_json, uint64_t seed) {
  return Guard([&] {
    Require(out_dir, "out_dir");
    std::uint64_t split_seed = seed;
    const fvae::ToyCorpusConfig cfg =
        ToyConfigFromJson(ParseObject(config_json, "toy corpus config"), &split_seed);
    const fvae::ToyCorpus corpus = fvae::GenerateToyCorpus(cfg, fvae::FeatureConfig(), seed);
    fvae::WriteToyCorpus(out_dir, corpus, split_seed);
    fvae::WriteTextFile(std::string(out_dir) + "/toy_config.json",
                        ToyConfigToJson(cfg, seed, split_seed).dump(2));
  });
}

fvae_status fvae_fit_stats(const char* manifest, const char* feature_config_json,
                           const char* out_path) {
  return Guard([&] {
    Require(manifest, "manifest");
    Require(out_path, "out_path");
    const fvae::FeatureConfig fc =
        fvae::FeatureConfig::FromJson(ParseObject(feature_config_json, "feature config").dump());
    const fvae::FeatureBank bank = fvae::LoadFeatureBank(manifest, fc, false);
    bank.stats.Save(out_path);
    const std::filesystem::path out(out_path);
    const json snapshot = {{"command", "fit-stats"},
                           {"manifest", manifest},
                           {"features", json::parse(fc.ToJson())}};
    fvae::WriteTextFile((out.parent_path() / (out.stem().string() + ".config.json")).string(),
                        snapshot.dump(2));
  });
}

fvae_status fvae_resolve_train_config(const char* config_json, const char* overrides_json,
                                      char** out_json) {
  return Guard([&] {
    Require(out_json, "out_json");
    const fvae::TrainConfig cfg = ResolveConfig(config_json, overrides_json);
    cfg.Validate();
    *out_json = CopyString(cfg.ToJson());
  });
}

fvae_status fvae_train(const char* config_json, const char* overrides_json, const char* manifest,
                       const char* stats_path, const char* out_dir, int verbose) {
  return Guard([&] {
    Require(manifest, "manifest");
    Require(out_dir, "out_dir");
    const fvae::TrainConfig cfg = ResolveConfig(config_json, overrides_json);
    std::optional<fvae::FeatureStats> stats;
    if (stats_path != nullptr && *stats_path != '\0') stats = fvae::FeatureStats::Load(stats_path);
    const fvae::FeatureBank bank =
        fvae::LoadFeatureBank(manifest, cfg.features, cfg.vtlp, stats ? &*stats : nullptr);
    fvae::Trainer trainer(cfg, bank);
    std::filesystem::create_directories(out_dir);
    const json command = {{"command", "train"},
                          {"manifest", std::filesystem::absolute(manifest).string()},
                          {"stats", stats_path ? stats_path : ""},
                          {"config", "train_config.json"}};
    fvae::WriteTextFile(std::string(out_dir) + "/command.json", command.dump(2));
    trainer.Train(out_dir, verbose ? &std::cerr : nullptr);
  });
}

fvae_status fvae_model_load(const char* model_dir, fvae_model** out) {
  return Guard([&] {
    Require(model_dir, "model_dir");
    Require(out, "out");
    auto m = std::make_unique<fvae_model>();
    m->bundle = fvae::LoadModelBundle(model_dir);
    m->dir = model_dir;
    *out = m.release();
  });
}

void fvae_model_free(fvae_model* model) { delete model; }

fvae_status fvae_model_info(const fvae_model* model, char** out_json) {
  return Guard([&] {
    Require(model, "model");
    Require(out_json, "out_json");
    const json j = {{"model_dir", model->dir},
                    {"config", json::parse(model->bundle.config.ToJson())},
                    {"step", model->bundle.step},
                    {"val_l_rec", model->bundle.val_l_rec},
                    {"checkpoint_hash", fvae::HashHex(model->bundle.checkpoint_hash)}};
    *out_json = CopyString(j.dump(2));
  });
}

fvae_status fvae_features_load(const char* path, fvae_features** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto f = std::make_unique<fvae_features>();
    f->archive = fvae::ReadFeatureArchive(path);
    *out = f.release();
  });
}

fvae_status fvae_features_from_wav(const fvae_model* model, const char* wav_path,
                                   fvae_features** out) {
  return Guard([&] {
    Require(model, "model");
    Require(wav_path, "wav_path");
    Require(out, "out");
    const fvae::FeatureConfig& fc = model->bundle.features;
    const fvae::AudioClip clip = fvae::ReadWav(wav_path);
    FVAE_CHECK(clip.sample_rate == fc.sample_rate, fvae::ErrorCode::kConfigError,
               std::string(wav_path) + ": unexpected sample rate");
    auto f = std::make_unique<fvae_features>();
    f->archive.utterance_id = std::filesystem::path(wav_path).stem().string();
    f->archive.features = fvae::ApplyGlobalNorm(
        fvae::ComputeLogMel(clip, fc, fvae::BuildFilterbank(fc)), model->bundle.stats);
    *out = f.release();
  });
}

fvae_status fvae_features_shape(const fvae_features* f, int* bands, int* frames) {
  return Guard([&] {
    Require(f, "features");
    if (bands) *bands = f->archive.features.bands();
    if (frames) *frames = f->archive.features.frames();
  });
}

fvae_status fvae_features_copy_data(const fvae_features* f, float* dst, size_t count) {
  return Guard([&] {
    Require(f, "features");
    Require(dst, "dst");
    const Eigen::MatrixXf& v = f->archive.features.values;
    FVAE_CHECK(count == static_cast<size_t>(v.size()), fvae::ErrorCode::kShapeError,
               "destination holds " + std::to_string(count) + " values, need " +
                   std::to_string(v.size()));
    Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        dst, v.rows(), v.cols()) = v;
  });
}

fvae_status fvae_features_save(const fvae_features* f, const char* path) {
  return Guard([&] {
    Require(f, "features");
    Require(path, "path");
    fvae::WriteFeatureArchive(path, f->archive);
  });
}

void fvae_features_free(fvae_features* f) { delete f; }

fvae_status fvae_convert(fvae_model* model, const fvae_features* src, const fvae_features* tgt,
                         fvae_features** out) {
  return Guard([&] {
    Require(model, "model");
    Require(src, "src");
    Require(tgt, "tgt");
    Require(out, "out");
    auto f = std::make_unique<fvae_features>();
    f->archive.utterance_id = src->archive.utterance_id + "_to_" + tgt->archive.speaker_id;
    f->archive.speaker_id = tgt->archive.speaker_id;
    f->archive.features =
        model->bundle.model->Convert(GlobalNormalized(model, src), GlobalNormalized(model, tgt));
    *out = f.release();
  });
}

fvae_status fvae_invert_to_wav(const fvae_model* model, const fvae_features* f,
                               const char* wav_path, int iterations) {
  return Guard([&] {
    Require(model, "model");
    Require(f, "features");
    Require(wav_path, "wav_path");
    FVAE_CHECK(iterations >= 1, fvae::ErrorCode::kConfigError, "iterations must be >= 1");
    const fvae::AudioClip clip = fvae::InvertToAudio(
        GlobalNormalized(model, f), model->bundle.stats, model->bundle.features, iterations);
    fvae::WriteWav(wav_path, clip);
  });
}

fvae_status fvae_evaluate(const char* model_dir, const char* manifest, const char* probes_dir,
                          const char* eval_config_json, const char* out_dir, int verbose) {
  return Guard([&] {
    Require(model_dir, "model_dir");
    Require(manifest, "manifest");
    Require(probes_dir, "probes_dir");
    Require(out_dir, "out_dir");
    namespace fs = std::filesystem;
    const json user = ParseObject(eval_config_json, "evaluation config");
    fvae::EvaluationConfig ec;
    ec.posthoc = user.value("posthoc", true);
    ec.two_pass = user.value("two_pass", true);
    ec.seed = user.value("seed", std::uint64_t{0});
    if (user.contains("probe")) ec.probe = fvae::ProbeConfig::FromJson(user["probe"].dump());
    fvae::ProbeConfig oracle_cfg = ec.probe;
    if (user.contains("oracle_probe"))
      oracle_cfg = fvae::ProbeConfig::FromJson(user["oracle_probe"].dump());
    oracle_cfg.seed = ec.seed;

    fvae::ModelBundle bundle = fvae::LoadModelBundle(model_dir);
    const fvae::FeatureBank bank =
        fvae::LoadFeatureBank(manifest, bundle.features, false, &bundle.stats);

    fs::create_directories(probes_dir);
    const std::string spk_path = std::string(probes_dir) + "/oracle_speaker.ckpt";
    const std::string phone_path = std::string(probes_dir) + "/oracle_phone.ckpt";
    fvae::OracleProbes oracle;
    if (fs::exists(spk_path) && fs::exists(phone_path)) {
      oracle.speaker = fvae::Probe::Load(spk_path);
      oracle.phone = fvae::Probe::Load(phone_path);
    } else {
      if (verbose) std::cerr << "training oracle probes\n";
      oracle = fvae::TrainOracleProbes(bank, oracle_cfg);
      oracle.speaker->Save(spk_path);
      oracle.phone->Save(phone_path);
    }

    fvae::EvaluationReport r = fvae::Evaluate(*bundle.model, bank, oracle, ec);
    r.model_id = fs::path(model_dir).filename().string();
    r.checkpoint_hash = fvae::HashHex(bundle.checkpoint_hash);
    r.corpus = fs::absolute(manifest).string();
    const json train_cfg =
        json::parse(fvae::ReadTextFile(std::string(model_dir) + "/train_config.json"), nullptr,
                    false);
    if (!train_cfg.is_discarded()) r.mode = train_cfg.value("mode", std::string());

    fs::create_directories(out_dir);
    fvae::WriteReport(std::string(out_dir) + "/report.json", r);
    fvae::WriteTextFile(std::string(out_dir) + "/report.csv", r.ToCsv());
    const json snapshot = {{"command", "evaluate"},
                           {"model", fs::absolute(model_dir).string()},
                           {"manifest", fs::absolute(manifest).string()},
                           {"probes_dir", fs::absolute(probes_dir).string()},
                           {"posthoc", ec.posthoc},
                           {"two_pass", ec.two_pass},
                           {"seed", ec.seed},
                           {"probe", json::parse(ec.probe.ToJson())},
                           {"oracle_probe", json::parse(oracle_cfg.ToJson())}};
    fvae::WriteTextFile(std::string(out_dir) + "/eval_config.json", snapshot.dump(2));
  });
}

}  // extern "C"
