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

#ifndef FVAE_EVALUATION_HPP_
#define FVAE_EVALUATION_HPP_

// Measurement protocol: frame-rate probes on spectrograms (oracles) and on
// content embeddings, conversion accuracies and one-/two-pass extraction.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fvae/corpus.hpp"
#include "fvae/model.hpp"
#include "fvae/nn/blocks.hpp"

namespace fvae {

enum class ProbeTarget { kSpeaker, kPhone };
enum class ProbeDomain { kSpectrogram, kEmbedding };

const char* ProbeTargetName(ProbeTarget t);
const char* ProbeDomainName(ProbeDomain d);

struct ProbeConfig {
  ProbeTarget target = ProbeTarget::kSpeaker;
  ProbeDomain domain = ProbeDomain::kSpectrogram;
  int n_classes = 0;
  int input_dim = 80;  // F for spectrograms, D_z for embeddings
  int downsample = 1;  // S_ds of the probed model
  int hidden = 512;
  int hidden_kernel = 5;
  int n_resblocks = 3;
  nn::NormKind norm = nn::NormKind::kBatch;
  long steps = 5000;
  int batch = 64;
  double min_seconds = 1.0;
  double max_seconds = 3.0;
  double lr = 5e-4;
  double clip = 20.0;
  int validate_every = 250;
  int patience = 4;  // validations without improvement before stopping; 0 disables
  double hop_seconds = 0.01;
  std::uint64_t seed = 0;

  void Validate() const;
  std::string ToJson() const;
  static ProbeConfig FromJson(const std::string& text);
};

// One probe example: input [C x T_in] and frame-rate labels (negative
// labels are ignored). Embedding inputs have T_in = ceil(T / S_ds).
struct ProbeExample {
  Eigen::MatrixXf input;
  std::vector<int> labels;
};

struct ProbeData {
  std::vector<ProbeExample> train;
  std::vector<ProbeExample> validation;
};

struct AccuracyCount {
  long correct = 0;
  long total = 0;

  double value() const { return total > 0 ? static_cast<double>(correct) / total : 0.0; }
  AccuracyCount& operator+=(const AccuracyCount& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

AccuracyCount FrameAccuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Enc(n, 5, 1) on spectrograms or Dec(n, S_ds, S_ds) on embeddings.
class Probe {
 public:
  Probe(const ProbeConfig& cfg, Rng& rng);
  ~Probe();

  // Logits [n x B*T_out]; T_out = T_in for spectrograms, T_in * S_ds for
  // embeddings.
  nn::Seq<float> Forward(const nn::Seq<float>& x);
  nn::Seq<float> Backward(const nn::Seq<float>& dy);
  // Argmax per frame, trimmed to `frames`; evaluation mode.
  std::vector<int> Predict(const Eigen::MatrixXf& input, int frames);
  int OutputFrames(int input_frames) const;
  // Throws AlignmentError when the label count cannot match the input.
  void CheckAlignment(const ProbeExample& e) const;

  void SetTraining(bool training);
  std::vector<nn::Param<float>*> Parameters();
  std::vector<nn::Param<float>*> State();
  const ProbeConfig& config() const { return cfg_; }

  void Save(const std::string& path);
  static std::unique_ptr<Probe> Load(const std::string& path);

 private:
  ProbeConfig cfg_;
  std::unique_ptr<nn::Encoder<float>> enc_;
  std::unique_ptr<nn::Decoder<float>> dec_;
};

struct ProbeTrainResult {
  double best_val_accuracy = 0.0;
  long best_step = 0;
  long steps_run = 0;
};

// Mini-batches of random crops; keeps the parameters with the highest
// validation frame accuracy.
ProbeTrainResult TrainProbe(Probe& probe, const ProbeData& data);
std::unique_ptr<Probe> TrainNewProbe(const ProbeConfig& cfg, const ProbeData& data,
                                     ProbeTrainResult* result = nullptr);

AccuracyCount EvaluateProbe(Probe& probe, const std::vector<ProbeExample>& examples);

// Frame-rate speaker labels (the utterance's speaker index on every frame).
std::vector<int> SpeakerFrameLabels(const UtteranceFeatures& u);

ProbeData SpectrogramProbeData(const FeatureBank& bank, ProbeTarget target);
std::vector<ProbeExample> SpectrogramExamples(const std::vector<UtteranceFeatures>& pool,
                                              ProbeTarget target);

struct OracleProbes {
  std::unique_ptr<Probe> speaker;
  std::unique_ptr<Probe> phone;
};

// Oracle classifiers on clean, globally normalised spectrograms. `base`
// supplies network size and training budget.
OracleProbes TrainOracleProbes(const FeatureBank& bank, const ProbeConfig& base);

// ---------------------------------------------------------------------------
// Conversion and extraction.

enum class Extraction { kOnePass, kTwoPass };

// mu(instance_normalize(convert(X, common_speaker))).
Eigen::MatrixXf TwoPassExtract(FactorizedVae<float>& model, const MelSpectrogram& x,
                               const SpeakerEmbedding& common_speaker);
Eigen::MatrixXf OnePassExtract(FactorizedVae<float>& model, const MelSpectrogram& x);

// The validation speaker embedding closest (Euclidean) to their mean.
SpeakerEmbedding SelectCommonSpeaker(FactorizedVae<float>& model,
                                     const std::vector<UtteranceFeatures>& validation);

std::vector<ProbeExample> EmbeddingExamples(FactorizedVae<float>& model,
                                            const std::vector<UtteranceFeatures>& pool,
                                            ProbeTarget target, Extraction extraction,
                                            const SpeakerEmbedding* common_speaker);

// Shuffled conversion partners; a partner of the source's own speaker is
// redrawn uniformly among the other speakers' utterances.
std::vector<int> ConversionPartners(const std::vector<UtteranceFeatures>& pool,
                                    std::uint64_t seed);

struct ConversionMetrics {
  double source_spk_acc = 0.0;
  double target_spk_acc = 0.0;
  double phone_acc = 0.0;
  long frames = 0;
};

// Scores every test utterance converted to its partner's speaker.
ConversionMetrics EvaluateConversion(FactorizedVae<float>& model,
                                     const std::vector<UtteranceFeatures>& test,
                                     OracleProbes& oracle, std::uint64_t seed);
// The same partners scored on the unconverted spectrograms.
ConversionMetrics EvaluateClean(const std::vector<UtteranceFeatures>& test,
                                OracleProbes& oracle, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reports.

struct EvaluationReport {
  double source_spk_acc = 0.0;
  double target_spk_acc = 0.0;
  double phone_acc = 0.0;
  double clean_source_spk_acc = 0.0;
  double clean_target_spk_acc = 0.0;
  double clean_phone_acc = 0.0;
  double probe_spk_acc_one_pass = 0.0;
  double probe_phone_acc_one_pass = 0.0;
  double probe_spk_acc_two_pass = 0.0;
  double probe_phone_acc_two_pass = 0.0;
  std::string model_id;
  std::string checkpoint_hash;
  std::string corpus;
  std::string mode;
  std::uint64_t seed = 0;

  void Validate() const;
  std::string ToJson() const;
  static EvaluationReport FromJson(const std::string& text);
  // Header plus one row, conversion columns then probe columns.
  std::string ToCsv() const;
};

void WriteReport(const std::string& path, const EvaluationReport& report);
EvaluationReport ReadReport(const std::string& path);

struct EvaluationConfig {
  ProbeConfig probe;  // embedding probe size and budget
  bool posthoc = true;
  bool two_pass = true;
  std::uint64_t seed = 0;
};

EvaluationReport Evaluate(FactorizedVae<float>& model, const FeatureBank& bank,
                          OracleProbes& oracle, const EvaluationConfig& cfg);

std::string HashHex(std::uint64_t h);

}  // namespace fvae

#endif  // FVAE_EVALUATION_HPP_
