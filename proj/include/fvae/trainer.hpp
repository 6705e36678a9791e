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

#ifndef FVAE_TRAINER_HPP_
#define FVAE_TRAINER_HPP_

// Training loop: Adam, per-network global-norm clipping, the 3:1
// adversary/joint schedule, periodic validation and best-checkpoint
// selection on validation reconstruction error.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fvae/adversaries.hpp"
#include "fvae/corpus.hpp"
#include "fvae/model.hpp"
#include "fvae/nn/optim.hpp"
#include "fvae/objectives.hpp"

namespace fvae {

enum class TrainMode { kPlain, kBottleneck, kAdversarialClassifier, kAdversarialCpc };

const char* TrainModeName(TrainMode m);
TrainMode ParseTrainMode(const std::string& s);  // ConfigError on unknown names

struct ClipConfig {
  double encoder = 10.0;  // applied to each encoder separately
  double decoder = 20.0;
  double adversary = 2.0;
};

struct TrainConfig {
  long steps = 100000;  // joint (or plain) updates
  int batch = 48;
  double lr = 5e-4;
  ClipConfig clip;
  int adv_steps_per_joint = 3;
  TrainMode mode = TrainMode::kPlain;
  bool paired = false;
  bool vtlp = false;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  int validate_every = 500;
  int log_every = 50;
  double min_seconds = 2.0;
  double max_seconds = 3.0;
  double paired_min_seconds = 4.0;
  double paired_max_seconds = 6.0;
  int max_validation_utterances = 0;  // 0: all
  Reduction reduction = Reduction::kMeanOverBatch;
  ModelConfig model;
  AdversaryConfig adversary;
  FeatureConfig features;

  bool has_adversary() const {
    return mode == TrainMode::kAdversarialClassifier || mode == TrainMode::kAdversarialCpc;
  }
  ObjectiveMode objective() const;
  SegmentSpec segment_spec() const;
  void Validate() const;
  std::string ToJson() const;
  // Overlays the keys present in `text` onto `base`; unknown keys are rejected.
  static TrainConfig FromJson(const std::string& text, const TrainConfig& base);
  static TrainConfig FromJson(const std::string& text) { return FromJson(text, TrainConfig()); }
};

// Defaults for a mode: lambda, pairing, VTLP and the bottleneck.
TrainConfig PresetFor(TrainMode mode);

// Re-derives mode-bound fields: bottleneck forces S_ds=32, the adversary
// kind and input width follow the mode and D_z.
void ApplyModeConstraints(TrainConfig& cfg);

// Preset for `mode` (flag or file), overlaid with the JSON file.
TrainConfig ResolveTrainConfig(const std::string* json_text, std::optional<TrainMode> mode);

enum class UpdateKind { kPlain, kAdversary, kJoint };
const char* UpdateKindName(UpdateKind k);

// Repeating [k x adversary, 1 x joint] pattern; plain updates otherwise.
class UpdateSchedule {
 public:
  UpdateSchedule(bool adversarial, int adversary_steps_per_joint);
  UpdateKind Next();
  long adversary_steps() const { return adversary_steps_; }
  long joint_steps() const { return joint_steps_; }
  long plain_steps() const { return plain_steps_; }

 private:
  bool adversarial_;
  int k_;
  long position_ = 0;
  long adversary_steps_ = 0;
  long joint_steps_ = 0;
  long plain_steps_ = 0;
};

struct StepStats {
  UpdateKind kind = UpdateKind::kPlain;
  long step = 0;  // joint/plain updates completed so far
  LossBreakdown loss;
  double grad_norm_content = 0.0;
  double grad_norm_speaker = 0.0;
  double grad_norm_decoder = 0.0;
  double grad_norm_adversary = 0.0;
};

struct TrainResult {
  long steps = 0;
  long adversary_steps = 0;
  long joint_steps = 0;
  long best_step = 0;
  double best_val_l_rec = 0.0;
  std::vector<StepStats> history;  // joint/plain updates only
  std::vector<std::pair<long, double>> validation;
};

// A prepared training batch.
struct TrainBatch {
  nn::Seq<float> target;         // X1, globally normalised
  nn::Seq<float> content_input;  // instance-normalised (VTLP'd when enabled)
  nn::Seq<float> speaker_input;  // X2
  std::vector<int> speakers;
};

class Trainer {
 public:
  // `bank` must outlive the trainer; VTLP needs train power spectra.
  Trainer(TrainConfig cfg, const FeatureBank& bank);
  ~Trainer();

  TrainBatch SampleBatch();
  // One scheduled update.
  StepStats Step();
  StepStats PlainOrJointStep(const TrainBatch& batch, bool joint);
  double AdversaryOnlyStep(const TrainBatch& batch);
  // Mean per-utterance reconstruction loss over the validation split in
  // test mode, without VTLP.
  double Validate();

  // Runs until cfg.steps joint/plain updates; writes checkpoints and the
  // JSON-lines log to `out_dir` when non-empty. The best-validation
  // parameters are loaded into the model on return.
  TrainResult Train(const std::string& out_dir, std::ostream* progress = nullptr);

  void SaveModelCheckpoint(const std::string& path, long step, double val_l_rec);
  void SaveAdversaryCheckpoint(const std::string& path, long step);

  FactorizedVae<float>& model() { return *model_; }
  Adversary<float>* adversary() { return adversary_.get(); }
  const TrainConfig& config() const { return cfg_; }
  const UpdateSchedule& schedule() const { return schedule_; }
  long step() const { return step_; }

 private:
  void CheckFinite(const LossBreakdown& loss, const TrainBatch& batch) const;

  TrainConfig cfg_;
  const FeatureBank& bank_;
  Rng rng_;
  std::unique_ptr<FactorizedVae<float>> model_;
  std::unique_ptr<Adversary<float>> adversary_;
  std::unique_ptr<nn::Adam<float>> vae_opt_;
  std::unique_ptr<nn::Adam<float>> adv_opt_;
  UpdateSchedule schedule_;
  long step_ = 0;
};

// ---------------------------------------------------------------------------
// Model directories: model.ckpt, model_config.json, feature_stats.json,
// train_config.json, train_log.jsonl and (adversarial modes) adversary.ckpt.

struct ModelBundle {
  ModelConfig config;
  FeatureConfig features;
  FeatureStats stats;
  std::uint64_t checkpoint_hash = 0;
  long step = 0;
  double val_l_rec = 0.0;
  std::unique_ptr<FactorizedVae<float>> model;
};

ModelBundle LoadModelBundle(const std::string& dir);

// Builds the feature bank for a manifest of WAV files.
FeatureBank LoadFeatureBank(const std::string& manifest_path, const FeatureConfig& cfg,
                            bool keep_train_power, const FeatureStats* stats = nullptr);

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace fvae

#endif  // FVAE_TRAINER_HPP_
