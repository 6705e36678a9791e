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

#include "fvae/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "fvae/error.hpp"
#include "json.hpp"

namespace fvae {

namespace fs = std::filesystem;

const char* SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

const std::vector<UtteranceRecord>& SplitManifest::get(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kValidation: return validation;
    case Split::kTest: return test;
  }
  return train;
}

SplitManifest SplitCorpus(std::vector<UtteranceRecord> records,
                          std::uint64_t seed) {
  std::map<std::string, std::vector<UtteranceRecord>> by_speaker;
  for (UtteranceRecord& r : records) {
    FVAE_CHECK(r.duration > 0.0, ErrorCode::kConfigError,
               r.utterance_id + ": non-positive duration");
    by_speaker[r.speaker_id].push_back(std::move(r));
  }
  SplitManifest m;
  m.split_seed = seed;
  Rng rng(seed);
  for (auto& [speaker, utts] : by_speaker) {
    const int n = static_cast<int>(utts.size());
    FVAE_CHECK(n >= 3, ErrorCode::kInsufficientData,
               "speaker " + speaker + " has fewer than 3 utterances");
    std::sort(utts.begin(), utts.end(),
              [](const auto& a, const auto& b) {
                return a.utterance_id < b.utterance_id;
              });
    std::shuffle(utts.begin(), utts.end(), rng);
    const int n_val = std::max(1, static_cast<int>(std::lround(0.1 * n)));
    const int n_test = std::max(1, static_cast<int>(std::lround(0.1 * n)));
    const int n_train = n - n_val - n_test;
    for (int i = 0; i < n; ++i) {
      auto& dst = i < n_train ? m.train
                  : i < n_train + n_val ? m.validation
                                        : m.test;
      dst.push_back(std::move(utts[i]));
    }
  }
  return m;
}

void WriteManifest(const std::string& path, const SplitManifest& manifest) {
  std::ofstream out(path);
  FVAE_CHECK(out.good(), ErrorCode::kIoError, "cannot write " + path);
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    for (const UtteranceRecord& r : manifest.get(s)) {
      nlohmann::json j = {{"utterance_id", r.utterance_id},
                          {"speaker_id", r.speaker_id},
                          {"path", r.path},
                          {"duration", r.duration},
                          {"split", SplitName(s)}};
      if (!r.label_path.empty()) j["labels"] = r.label_path;
      out << j.dump() << "\n";
    }
  }
}

SplitManifest ReadManifest(const std::string& path) {
  std::ifstream in(path);
  FVAE_CHECK(in.good(), ErrorCode::kIoError, "cannot open " + path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).string();
  };
  SplitManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kFormatError,
           path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    for (const char* key :
         {"utterance_id", "speaker_id", "path", "duration", "split"})
      FVAE_CHECK(j.contains(key), ErrorCode::kFormatError,
                 path + ":" + std::to_string(lineno) + ": missing " + key);
    UtteranceRecord r;
    r.utterance_id = j["utterance_id"].get<std::string>();
    r.speaker_id = j["speaker_id"].get<std::string>();
    r.path = resolve(j["path"].get<std::string>());
    r.duration = j["duration"].get<double>();
    if (j.contains("labels")) r.label_path = resolve(j["labels"].get<std::string>());
    const std::string split = j["split"].get<std::string>();
    if (split == "train") {
      m.train.push_back(std::move(r));
    } else if (split == "validation") {
      m.validation.push_back(std::move(r));
    } else if (split == "test") {
      m.test.push_back(std::move(r));
    } else {
      Fail(ErrorCode::kFormatError, path + ": unknown split '" + split + "'");
    }
  }
  std::map<std::string, int> seen;
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest})
    for (const UtteranceRecord& r : m.get(s))
      FVAE_CHECK(++seen[r.utterance_id] == 1, ErrorCode::kFormatError,
                 "utterance " + r.utterance_id + " listed twice");
  return m;
}

const std::vector<UtteranceFeatures>& FeatureBank::get(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kValidation: return validation;
    case Split::kTest: return test;
  }
  return train;
}

int FeatureBank::SpeakerIndex(const std::string& id) const {
  auto it = std::lower_bound(speakers.begin(), speakers.end(), id);
  FVAE_CHECK(it != speakers.end() && *it == id, ErrorCode::kLabelError,
             "unknown speaker " + id);
  return static_cast<int>(it - speakers.begin());
}

SegmentBatch SampleSegmentBatch(const std::vector<UtteranceFeatures>& pool,
                                const SegmentSpec& spec,
                                const FeatureConfig& cfg, Rng& rng) {
  FVAE_CHECK(spec.batch >= 1, ErrorCode::kConfigError, "batch must be >= 1");
  FVAE_CHECK(!pool.empty(), ErrorCode::kInsufficientData, "empty pool");
  const double fps = 1000.0 / cfg.hop_ms;
  const double lo_s = spec.paired ? spec.paired_min_seconds : spec.min_seconds;
  const double hi_s = spec.paired ? spec.paired_max_seconds : spec.max_seconds;
  const int lo = static_cast<int>(std::lround(lo_s * fps));
  const int hi = static_cast<int>(std::lround(hi_s * fps));
  FVAE_CHECK(lo >= 2 && lo <= hi, ErrorCode::kConfigError,
             "invalid segment length range");

  const int crop = UniformInt(rng, lo, hi);
  const int needed = spec.paired ? 2 * (crop / 2) : crop;
  std::vector<int> eligible;
  for (int i = 0; i < static_cast<int>(pool.size()); ++i)
    if (pool[i].normalized.frames() >= needed) eligible.push_back(i);
  FVAE_CHECK(!eligible.empty(), ErrorCode::kInsufficientData,
             "no utterance has " + std::to_string(needed) + " frames");

  SegmentBatch out;
  out.batch_size = spec.batch;
  out.crop_frames = spec.paired ? crop / 2 : crop;
  out.bands = pool.front().normalized.bands();
  out.items.resize(spec.batch);
  if (spec.paired) out.pairs.resize(spec.batch);
  for (int b = 0; b < spec.batch; ++b) {
    if (spec.paired && b % 2 == 1) {
      out.items[b] = out.pairs[b - 1];
      out.pairs[b] = out.items[b - 1];
      continue;
    }
    const int u = eligible[UniformInt(rng, 0, static_cast<int>(eligible.size()) - 1)];
    const int start = UniformInt(rng, 0, pool[u].normalized.frames() - needed);
    out.items[b] = {u, start, out.crop_frames};
    if (spec.paired) out.pairs[b] = {u, start + out.crop_frames, out.crop_frames};
  }

  const int T = out.crop_frames;
  auto gather = [&](const std::vector<SegmentRef>& refs) {
    Eigen::MatrixXf m(out.bands, static_cast<long>(spec.batch) * T);
    for (int b = 0; b < spec.batch; ++b)
      m.middleCols(static_cast<long>(b) * T, T) =
          pool[refs[b].utterance].normalized.values.middleCols(refs[b].start, T);
    return m;
  };
  out.features = gather(out.items);
  if (spec.paired) out.pair_features = gather(out.pairs);
  out.speaker_ids.resize(spec.batch);
  for (int b = 0; b < spec.batch; ++b)
    out.speaker_ids[b] = pool[out.items[b].utterance].speaker;
  return out;
}

}  // namespace fvae
