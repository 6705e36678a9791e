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

#include "fvae/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "fvae/checkpoint.hpp"
#include "fvae/error.hpp"
#include "fvae/nn/optim.hpp"
#include "fvae/objectives.hpp"
#include "fvae/trainer.hpp"
#include "json.hpp"

namespace fvae {
namespace {

using nlohmann::json;

std::vector<int> ArgmaxColumns(const nn::Matrix<float>& logits, int frames) {
  std::vector<int> out(frames);
  for (int t = 0; t < frames; ++t) {
    Eigen::Index idx = 0;
    logits.col(t).maxCoeff(&idx);
    out[t] = static_cast<int>(idx);
  }
  return out;
}

std::vector<int> Labels(const UtteranceFeatures& u, ProbeTarget target) {
  if (target == ProbeTarget::kSpeaker) return SpeakerFrameLabels(u);
  FVAE_CHECK(!u.phones.empty(), ErrorCode::kLabelError,
             u.utterance_id + " has no phone labels");
  return u.phones;
}

}  // namespace

const char* ProbeTargetName(ProbeTarget t) {
  return t == ProbeTarget::kSpeaker ? "speaker" : "phone";
}
const char* ProbeDomainName(ProbeDomain d) {
  return d == ProbeDomain::kSpectrogram ? "spectrogram" : "embedding";
}

void ProbeConfig::Validate() const {
  FVAE_CHECK(n_classes >= 1 && input_dim >= 1 && downsample >= 1, ErrorCode::kConfigError,
             "probe needs n_classes, input_dim and S_ds >= 1");
  FVAE_CHECK(hidden >= 1 && hidden_kernel >= 1 && n_resblocks >= 0, ErrorCode::kConfigError,
             "invalid probe network configuration");
  FVAE_CHECK(steps >= 1 && batch >= 1 && lr > 0.0 && clip > 0.0 && validate_every >= 1,
             ErrorCode::kConfigError, "invalid probe training configuration");
  FVAE_CHECK(min_seconds > 0.0 && max_seconds >= min_seconds && hop_seconds > 0.0,
             ErrorCode::kConfigError, "invalid probe segment lengths");
}

std::string ProbeConfig::ToJson() const {
  return json{{"target", ProbeTargetName(target)},
              {"domain", ProbeDomainName(domain)},
              {"n_classes", n_classes},
              {"input_dim", input_dim},
              {"downsample", downsample},
              {"hidden", hidden},
              {"hidden_kernel", hidden_kernel},
              {"n_resblocks", n_resblocks},
              {"norm", NormKindName(norm)},
              {"steps", steps},
              {"batch", batch},
              {"min_seconds", min_seconds},
              {"max_seconds", max_seconds},
              {"lr", lr},
              {"clip", clip},
              {"validate_every", validate_every},
              {"patience", patience},
              {"hop_seconds", hop_seconds},
              {"seed", seed}}
      .dump(2);
}

ProbeConfig ProbeConfig::FromJson(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  FVAE_CHECK(!j.is_discarded() && j.is_object(), ErrorCode::kFormatError,
             "malformed probe config");
  ProbeConfig c;
  try {
    c.target = j.value("target", std::string("speaker")) == "phone" ? ProbeTarget::kPhone
                                                                     : ProbeTarget::kSpeaker;
    c.domain = j.value("domain", std::string("spectrogram")) == "embedding"
                   ? ProbeDomain::kEmbedding
                   : ProbeDomain::kSpectrogram;
    c.n_classes = j.value("n_classes", c.n_classes);
    c.input_dim = j.value("input_dim", c.input_dim);
    c.downsample = j.value("downsample", c.downsample);
    c.hidden = j.value("hidden", c.hidden);
    c.hidden_kernel = j.value("hidden_kernel", c.hidden_kernel);
    c.n_resblocks = j.value("n_resblocks", c.n_resblocks);
    c.norm = ParseNormKind(j.value("norm", std::string("batch")));
    c.steps = j.value("steps", c.steps);
    c.batch = j.value("batch", c.batch);
    c.min_seconds = j.value("min_seconds", c.min_seconds);
    c.max_seconds = j.value("max_seconds", c.max_seconds);
    c.lr = j.value("lr", c.lr);
    c.clip = j.value("clip", c.clip);
    c.validate_every = j.value("validate_every", c.validate_every);
    c.patience = j.value("patience", c.patience);
    c.hop_seconds = j.value("hop_seconds", c.hop_seconds);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfigError, std::string("probe config: ") + e.what());
  }
  return c;
}

AccuracyCount FrameAccuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  FVAE_CHECK(predictions.size() == labels.size(), ErrorCode::kAlignmentError,
             "prediction and label counts differ");
  AccuracyCount c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    ++c.total;
    if (predictions[i] == labels[i]) ++c.correct;
  }
  return c;
}

// ---------------------------------------------------------------------------

Probe::Probe(const ProbeConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.Validate();
  if (cfg_.domain == ProbeDomain::kSpectrogram) {
    enc_ = std::make_unique<nn::Encoder<float>>(
        cfg_.input_dim,
        nn::EncConfig{cfg_.hidden, cfg_.hidden_kernel, cfg_.n_resblocks, cfg_.n_classes, 1, 1,
                      cfg_.norm},
        rng);
  } else {
    dec_ = std::make_unique<nn::Decoder<float>>(
        cfg_.input_dim,
        nn::DecConfig{cfg_.hidden, cfg_.hidden_kernel, cfg_.n_resblocks, cfg_.n_classes,
                      cfg_.downsample, cfg_.downsample, cfg_.norm},
        rng);
  }
}

Probe::~Probe() = default;

nn::Seq<float> Probe::Forward(const nn::Seq<float>& x) {
  FVAE_CHECK(x.channels() == cfg_.input_dim, ErrorCode::kShapeError,
             "probe input has the wrong channel count");
  return enc_ ? enc_->Forward(x) : dec_->Forward(x);
}

nn::Seq<float> Probe::Backward(const nn::Seq<float>& dy) {
  return enc_ ? enc_->Backward(dy) : dec_->Backward(dy);
}

int Probe::OutputFrames(int input_frames) const {
  return enc_ ? input_frames : input_frames * cfg_.downsample;
}

void Probe::CheckAlignment(const ProbeExample& e) const {
  const long n = static_cast<long>(e.labels.size());
  const long expected_in = enc_ ? n : (n + cfg_.downsample - 1) / cfg_.downsample;
  FVAE_CHECK(e.input.cols() == expected_in && n > 0, ErrorCode::kAlignmentError,
             "probe example has " + std::to_string(e.input.cols()) + " input frames for " +
                 std::to_string(n) + " labels");
  FVAE_CHECK(e.input.rows() == cfg_.input_dim, ErrorCode::kShapeError,
             "probe example has the wrong channel count");
}

std::vector<int> Probe::Predict(const Eigen::MatrixXf& input, int frames) {
  SetTraining(false);
  const nn::Seq<float> out = Forward(nn::Seq<float>(input, 1, static_cast<int>(input.cols())));
  FVAE_CHECK(out.frames >= frames, ErrorCode::kAlignmentError,
             "probe output shorter than the label sequence");
  return ArgmaxColumns(out.data, frames);
}

void Probe::SetTraining(bool training) {
  if (enc_) enc_->SetTraining(training);
  if (dec_) dec_->SetTraining(training);
}

std::vector<nn::Param<float>*> Probe::Parameters() {
  return enc_ ? enc_->Parameters("probe") : dec_->Parameters("probe");
}

std::vector<nn::Param<float>*> Probe::State() {
  return enc_ ? enc_->State("probe") : dec_->State("probe");
}

void Probe::Save(const std::string& path) {
  TensorArchive a;
  a.metadata = cfg_.ToJson();
  StoreParams(a, State());
  SaveArchive(path, a);
}

std::unique_ptr<Probe> Probe::Load(const std::string& path) {
  const TensorArchive a = LoadArchive(path);
  Rng rng(0);
  auto p = std::make_unique<Probe>(ProbeConfig::FromJson(a.metadata), rng);
  RestoreParams(a, p->State());
  p->SetTraining(false);
  return p;
}

AccuracyCount EvaluateProbe(Probe& probe, const std::vector<ProbeExample>& examples) {
  AccuracyCount c;
  for (const ProbeExample& e : examples) {
    probe.CheckAlignment(e);
    c += FrameAccuracy(probe.Predict(e.input, static_cast<int>(e.labels.size())), e.labels);
  }
  return c;
}

ProbeTrainResult TrainProbe(Probe& probe, const ProbeData& data) {
  const ProbeConfig& cfg = probe.config();
  FVAE_CHECK(!data.train.empty() && !data.validation.empty(), ErrorCode::kInsufficientData,
             "probe training needs train and validation examples");
  for (const auto& e : data.train) probe.CheckAlignment(e);
  for (const auto& e : data.validation) probe.CheckAlignment(e);

  Rng rng(DeriveSeed(cfg.seed, 20));
  nn::AdamConfig adam;
  adam.lr = cfg.lr;
  nn::Adam<float> opt(probe.Parameters(), adam);
  std::vector<nn::Param<float>*> state = probe.State();

  const int S = cfg.domain == ProbeDomain::kEmbedding ? cfg.downsample : 1;
  const int min_out = std::max(1, static_cast<int>(std::lround(cfg.min_seconds / cfg.hop_seconds)));
  const int max_out = std::max(min_out, static_cast<int>(std::lround(cfg.max_seconds / cfg.hop_seconds)));
  long shortest = std::numeric_limits<long>::max();
  for (const auto& e : data.train) shortest = std::min<long>(shortest, e.input.cols());

  ProbeTrainResult result;
  result.best_val_accuracy = -1.0;
  std::vector<Eigen::MatrixXf> best;
  int stale = 0;
  std::vector<int> eligible;
  for (long step = 1; step <= cfg.steps; ++step) {
    const int crop_out = UniformInt(rng, min_out, max_out);
    const int crop_in = static_cast<int>(
        std::min<long>(std::max(1, (crop_out + S - 1) / S), shortest));
    eligible.clear();
    for (std::size_t i = 0; i < data.train.size(); ++i)
      if (data.train[i].input.cols() >= crop_in) eligible.push_back(static_cast<int>(i));

    const int B = cfg.batch;
    nn::Seq<float> x(cfg.input_dim, B, crop_in);
    std::vector<int> labels(static_cast<std::size_t>(B) * crop_in * S, -1);
    for (int b = 0; b < B; ++b) {
      const ProbeExample& e =
          data.train[eligible[UniformInt(rng, 0, static_cast<int>(eligible.size()) - 1)]];
      const int start = UniformInt(rng, 0, static_cast<int>(e.input.cols()) - crop_in);
      x.item(b) = e.input.middleCols(start, crop_in);
      for (int k = 0; k < crop_in * S; ++k) {
        const std::size_t idx = static_cast<std::size_t>(start) * S + k;
        if (idx < e.labels.size())
          labels[static_cast<std::size_t>(b) * crop_in * S + k] = e.labels[idx];
      }
    }
    probe.SetTraining(true);
    const nn::Seq<float> out = probe.Forward(x);
    LossGrad<float> lg = FrameCrossEntropy(out, labels);
    FVAE_CHECK(std::isfinite(lg.value), ErrorCode::kNumericalError, "non-finite probe loss");
    opt.ZeroGrad();
    probe.Backward(nn::Seq<float>(std::move(lg.grad), out.batch, out.frames));
    nn::ClipGradNorm(probe.Parameters(), cfg.clip);
    opt.Step();
    result.steps_run = step;

    if (step % cfg.validate_every == 0 || step == cfg.steps) {
      const double acc = EvaluateProbe(probe, data.validation).value();
      if (acc > result.best_val_accuracy) {
        result.best_val_accuracy = acc;
        result.best_step = step;
        best.clear();
        for (auto* p : state) best.push_back(p->value);
        stale = 0;
      } else if (cfg.patience > 0 && ++stale >= cfg.patience) {
        break;
      }
    }
  }
  for (std::size_t i = 0; i < best.size(); ++i) state[i]->value = best[i];
  probe.SetTraining(false);
  return result;
}

std::unique_ptr<Probe> TrainNewProbe(const ProbeConfig& cfg, const ProbeData& data,
                                     ProbeTrainResult* result) {
  Rng rng(DeriveSeed(cfg.seed, 21));
  auto probe = std::make_unique<Probe>(cfg, rng);
  const ProbeTrainResult r = TrainProbe(*probe, data);
  if (result) *result = r;
  return probe;
}

std::vector<int> SpeakerFrameLabels(const UtteranceFeatures& u) {
  FVAE_CHECK(u.speaker >= 0, ErrorCode::kLabelError, u.utterance_id + " has no speaker index");
  return std::vector<int>(u.normalized.frames(), u.speaker);
}

std::vector<ProbeExample> SpectrogramExamples(const std::vector<UtteranceFeatures>& pool,
                                              ProbeTarget target) {
  std::vector<ProbeExample> out;
  out.reserve(pool.size());
  for (const auto& u : pool) out.push_back({u.normalized.values, Labels(u, target)});
  return out;
}

ProbeData SpectrogramProbeData(const FeatureBank& bank, ProbeTarget target) {
  return {SpectrogramExamples(bank.train, target), SpectrogramExamples(bank.validation, target)};
}

OracleProbes TrainOracleProbes(const FeatureBank& bank, const ProbeConfig& base) {
  OracleProbes o;
  ProbeConfig c = base;
  c.domain = ProbeDomain::kSpectrogram;
  c.input_dim = bank.config.n_mels;
  c.downsample = 1;
  c.hop_seconds = bank.config.hop_ms / 1000.0;

  c.target = ProbeTarget::kSpeaker;
  c.n_classes = static_cast<int>(bank.speakers.size());
  c.seed = DeriveSeed(base.seed, 30);
  o.speaker = TrainNewProbe(c, SpectrogramProbeData(bank, ProbeTarget::kSpeaker));

  c.target = ProbeTarget::kPhone;
  c.n_classes = bank.n_phones;
  c.seed = DeriveSeed(base.seed, 31);
  o.phone = TrainNewProbe(c, SpectrogramProbeData(bank, ProbeTarget::kPhone));
  return o;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXf OnePassExtract(FactorizedVae<float>& model, const MelSpectrogram& x) {
  model.SetTraining(false);
  return model.EncodeContent(InstanceNormalize(x)).mu;
}

Eigen::MatrixXf TwoPassExtract(FactorizedVae<float>& model, const MelSpectrogram& x,
                               const SpeakerEmbedding& common_speaker) {
  return OnePassExtract(model, model.ConvertWithSpeaker(x, common_speaker));
}

SpeakerEmbedding SelectCommonSpeaker(FactorizedVae<float>& model,
                                     const std::vector<UtteranceFeatures>& validation) {
  FVAE_CHECK(!validation.empty(), ErrorCode::kInsufficientData, "empty validation split");
  model.SetTraining(false);
  std::vector<Eigen::VectorXf> emb;
  emb.reserve(validation.size());
  for (const auto& u : validation) emb.push_back(model.EncodeSpeaker(u.normalized).s);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(emb.front().size());
  for (const auto& e : emb) mean += e.cast<double>();
  mean /= static_cast<double>(emb.size());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < emb.size(); ++i) {
    const double d = (emb[i].cast<double>() - mean).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return {emb[best]};
}

std::vector<ProbeExample> EmbeddingExamples(FactorizedVae<float>& model,
                                            const std::vector<UtteranceFeatures>& pool,
                                            ProbeTarget target, Extraction extraction,
                                            const SpeakerEmbedding* common_speaker) {
  FVAE_CHECK(extraction == Extraction::kOnePass || common_speaker != nullptr,
             ErrorCode::kConfigError, "two-pass extraction needs a common speaker");
  std::vector<ProbeExample> out;
  out.reserve(pool.size());
  for (const auto& u : pool) {
    Eigen::MatrixXf mu = extraction == Extraction::kOnePass
                             ? OnePassExtract(model, u.normalized)
                             : TwoPassExtract(model, u.normalized, *common_speaker);
    out.push_back({std::move(mu), Labels(u, target)});
  }
  return out;
}

std::vector<int> ConversionPartners(const std::vector<UtteranceFeatures>& pool,
                                    std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, 40));
  std::vector<int> perm(pool.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[perm[i]].speaker != pool[i].speaker) continue;
    std::vector<int> others;
    for (std::size_t j = 0; j < pool.size(); ++j)
      if (pool[j].speaker != pool[i].speaker) others.push_back(static_cast<int>(j));
    FVAE_CHECK(!others.empty(), ErrorCode::kInsufficientData,
               "conversion needs at least two speakers");
    perm[i] = others[UniformInt(rng, 0, static_cast<int>(others.size()) - 1)];
  }
  return perm;
}

namespace {

ConversionMetrics ScoreConversions(const std::vector<UtteranceFeatures>& test,
                                   const std::vector<int>& partners, OracleProbes& oracle,
                                   const std::function<MelSpectrogram(int, int)>& produce) {
  AccuracyCount src, tgt, phone;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const UtteranceFeatures& u = test[i];
    const UtteranceFeatures& p = test[partners[i]];
    const MelSpectrogram x = produce(static_cast<int>(i), partners[i]);
    const int T = u.normalized.frames();
    const std::vector<int> spk = oracle.speaker->Predict(x.values, T);
    src += FrameAccuracy(spk, std::vector<int>(T, u.speaker));
    tgt += FrameAccuracy(spk, std::vector<int>(T, p.speaker));
    if (!u.phones.empty()) phone += FrameAccuracy(oracle.phone->Predict(x.values, T), u.phones);
  }
  return {src.value(), tgt.value(), phone.value(), src.total};
}

}  // namespace

ConversionMetrics EvaluateConversion(FactorizedVae<float>& model,
                                     const std::vector<UtteranceFeatures>& test,
                                     OracleProbes& oracle, std::uint64_t seed) {
  FVAE_CHECK(!test.empty(), ErrorCode::kInsufficientData, "empty test split");
  const std::vector<int> partners = ConversionPartners(test, seed);
  model.SetTraining(false);
  return ScoreConversions(test, partners, oracle, [&](int i, int j) {
    return model.Convert(test[i].normalized, test[j].normalized);
  });
}

ConversionMetrics EvaluateClean(const std::vector<UtteranceFeatures>& test, OracleProbes& oracle,
                                std::uint64_t seed) {
  FVAE_CHECK(!test.empty(), ErrorCode::kInsufficientData, "empty test split");
  const std::vector<int> partners = ConversionPartners(test, seed);
  return ScoreConversions(test, partners, oracle,
                          [&](int i, int) { return test[i].normalized; });
}

// ---------------------------------------------------------------------------

std::string HashHex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void EvaluationReport::Validate() const {
  for (double v : {source_spk_acc, target_spk_acc, phone_acc, clean_source_spk_acc,
                   clean_target_spk_acc, clean_phone_acc, probe_spk_acc_one_pass,
                   probe_phone_acc_one_pass, probe_spk_acc_two_pass, probe_phone_acc_two_pass})
    FVAE_CHECK(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorCode::kFormatError,
               "accuracy outside [0, 1]");
}

std::string EvaluationReport::ToJson() const {
  return json{{"conversion",
               {{"source_spk_acc", source_spk_acc},
                {"target_spk_acc", target_spk_acc},
                {"phone_acc", phone_acc}}},
              {"clean",
               {{"source_spk_acc", clean_source_spk_acc},
                {"target_spk_acc", clean_target_spk_acc},
                {"phone_acc", clean_phone_acc}}},
              {"posthoc",
               {{"one_pass", {{"speaker", probe_spk_acc_one_pass},
                              {"phone", probe_phone_acc_one_pass}}},
                {"two_pass", {{"speaker", probe_spk_acc_two_pass},
                              {"phone", probe_phone_acc_two_pass}}}}},
              {"metadata",
               {{"model_id", model_id},
                {"checkpoint_hash", checkpoint_hash},
                {"corpus", corpus},
                {"mode", mode},
                {"seed", seed}}}}
      .dump(2);
}

EvaluationReport EvaluationReport::FromJson(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  FVAE_CHECK(!j.is_discarded() && j.is_object(), ErrorCode::kFormatError, "malformed report");
  auto num = [&](std::initializer_list<const char*> path) {
    const json* node = &j;
    std::string where;
    for (const char* key : path) {
      where += where.empty() ? key : std::string(".") + key;
      FVAE_CHECK(node->is_object() && node->contains(key), ErrorCode::kFormatError,
                 "report is missing '" + where + "'");
      node = &(*node)[key];
    }
    FVAE_CHECK(node->is_number(), ErrorCode::kFormatError, "'" + where + "' is not a number");
    return node->get<double>();
  };
  EvaluationReport r;
  r.source_spk_acc = num({"conversion", "source_spk_acc"});
  r.target_spk_acc = num({"conversion", "target_spk_acc"});
  r.phone_acc = num({"conversion", "phone_acc"});
  r.clean_source_spk_acc = num({"clean", "source_spk_acc"});
  r.clean_target_spk_acc = num({"clean", "target_spk_acc"});
  r.clean_phone_acc = num({"clean", "phone_acc"});
  r.probe_spk_acc_one_pass = num({"posthoc", "one_pass", "speaker"});
  r.probe_phone_acc_one_pass = num({"posthoc", "one_pass", "phone"});
  r.probe_spk_acc_two_pass = num({"posthoc", "two_pass", "speaker"});
  r.probe_phone_acc_two_pass = num({"posthoc", "two_pass", "phone"});
  FVAE_CHECK(j.contains("metadata") && j["metadata"].is_object(), ErrorCode::kFormatError,
             "report is missing 'metadata'");
  const json& m = j["metadata"];
  for (const char* key : {"model_id", "checkpoint_hash", "corpus", "mode", "seed"})
    FVAE_CHECK(m.contains(key), ErrorCode::kFormatError,
               std::string("report is missing 'metadata.") + key + "'");
  try {
    r.model_id = m["model_id"].get<std::string>();
    r.checkpoint_hash = m["checkpoint_hash"].get<std::string>();
    r.corpus = m["corpus"].get<std::string>();
    r.mode = m["mode"].get<std::string>();
    r.seed = m["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormatError, std::string("report metadata: ") + e.what());
  }
  r.Validate();
  return r;
}

std::string EvaluationReport::ToCsv() const {
  std::ostringstream os;
  os << "method,source_spk_acc,target_spk_acc,phone_acc,probe_spk_one_pass,"
        "probe_phone_one_pass,probe_spk_two_pass,probe_phone_two_pass\n";
  os << "clean," << clean_source_spk_acc << "," << clean_target_spk_acc << ","
     << clean_phone_acc << ",,,,\n";
  os << (mode.empty() ? model_id : mode) << "," << source_spk_acc << "," << target_spk_acc
     << "," << phone_acc << "," << probe_spk_acc_one_pass << "," << probe_phone_acc_one_pass
     << "," << probe_spk_acc_two_pass << "," << probe_phone_acc_two_pass << "\n";
  return os.str();
}

void WriteReport(const std::string& path, const EvaluationReport& report) {
  report.Validate();
  WriteTextFile(path, report.ToJson());
}

EvaluationReport ReadReport(const std::string& path) {
  return EvaluationReport::FromJson(ReadTextFile(path));
}

EvaluationReport Evaluate(FactorizedVae<float>& model, const FeatureBank& bank,
                          OracleProbes& oracle, const EvaluationConfig& cfg) {
  EvaluationReport r;
  r.seed = cfg.seed;
  const ConversionMetrics conv = EvaluateConversion(model, bank.test, oracle, cfg.seed);
  r.source_spk_acc = conv.source_spk_acc;
  r.target_spk_acc = conv.target_spk_acc;
  r.phone_acc = conv.phone_acc;
  const ConversionMetrics clean = EvaluateClean(bank.test, oracle, cfg.seed);
  r.clean_source_spk_acc = clean.source_spk_acc;
  r.clean_target_spk_acc = clean.target_spk_acc;
  r.clean_phone_acc = clean.phone_acc;
  if (!cfg.posthoc) return r;

  ProbeConfig pc = cfg.probe;
  pc.domain = ProbeDomain::kEmbedding;
  pc.input_dim = model.config().content_dim;
  pc.downsample = model.config().downsample;
  pc.hop_seconds = bank.config.hop_ms / 1000.0;

  SpeakerEmbedding common;
  if (cfg.two_pass) common = SelectCommonSpeaker(model, bank.validation);
  for (Extraction ex : {Extraction::kOnePass, Extraction::kTwoPass}) {
    if (ex == Extraction::kTwoPass && !cfg.two_pass) continue;
    const SpeakerEmbedding* cs = ex == Extraction::kTwoPass ? &common : nullptr;
    for (ProbeTarget target : {ProbeTarget::kSpeaker, ProbeTarget::kPhone}) {
      pc.target = target;
      pc.n_classes = target == ProbeTarget::kSpeaker ? static_cast<int>(bank.speakers.size())
                                                     : bank.n_phones;
      pc.seed = DeriveSeed(cfg.seed, 50 + 2 * static_cast<int>(ex) + static_cast<int>(target));
      ProbeData data{EmbeddingExamples(model, bank.train, target, ex, cs),
                     EmbeddingExamples(model, bank.validation, target, ex, cs)};
      auto probe = TrainNewProbe(pc, data);
      const double acc =
          EvaluateProbe(*probe, EmbeddingExamples(model, bank.test, target, ex, cs)).value();
      double& slot = ex == Extraction::kOnePass
                         ? (target == ProbeTarget::kSpeaker ? r.probe_spk_acc_one_pass
                                                            : r.probe_phone_acc_one_pass)
                         : (target == ProbeTarget::kSpeaker ? r.probe_spk_acc_two_pass
                                                            : r.probe_phone_acc_two_pass);
      slot = acc;
    }
  }
  return r;
}

}  // namespace fvae
