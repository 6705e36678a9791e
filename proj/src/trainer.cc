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

#include "fvae/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "fvae/checkpoint.hpp"
#include "fvae/error.hpp"
#include "fvae/io.hpp"
#include "json.hpp"

namespace fvae {
namespace {

using nlohmann::json;

json AdversaryConfigJson(const AdversaryConfig& a) {
  return {{"kind", AdversaryKindName(a.kind)}, {"n_speakers", a.n_speakers},
          {"cpc_dim", a.cpc_dim},              {"cpc_steps", a.cpc_steps},
          {"input_dim", a.input_dim},          {"hidden", a.hidden},
          {"hidden_kernel", a.hidden_kernel},  {"n_resblocks", a.n_resblocks},
          {"norm", NormKindName(a.norm)}};
}

AdversaryConfig AdversaryConfigFromJson(const json& j) {
  AdversaryConfig a;
  a.kind = ParseAdversaryKind(j.value("kind", std::string("cpc")));
  a.n_speakers = j.value("n_speakers", a.n_speakers);
  a.cpc_dim = j.value("cpc_dim", a.cpc_dim);
  a.cpc_steps = j.value("cpc_steps", a.cpc_steps);
  a.input_dim = j.value("input_dim", a.input_dim);
  a.hidden = j.value("hidden", a.hidden);
  a.hidden_kernel = j.value("hidden_kernel", a.hidden_kernel);
  a.n_resblocks = j.value("n_resblocks", a.n_resblocks);
  a.norm = ParseNormKind(j.value("norm", std::string("batch")));
  return a;
}

std::uint64_t Fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string MatrixSummary(const char* name, const Eigen::MatrixXf& m) {
  std::ostringstream os;
  const long n_bad = m.size() - (m.array().isFinite()).count();
  os << name << ": shape " << m.rows() << "x" << m.cols() << " non-finite " << n_bad;
  if (n_bad == 0 && m.size() > 0)
    os << " mean " << m.mean() << " min " << m.minCoeff() << " max " << m.maxCoeff();
  return os.str();
}

}  // namespace

const char* TrainModeName(TrainMode m) {
  switch (m) {
    case TrainMode::kPlain: return "plain";
    case TrainMode::kBottleneck: return "bottleneck";
    case TrainMode::kAdversarialClassifier: return "adv_clf";
    case TrainMode::kAdversarialCpc: return "adv_cpc";
  }
  return "plain";
}

TrainMode ParseTrainMode(const std::string& s) {
  if (s == "plain") return TrainMode::kPlain;
  if (s == "bottleneck") return TrainMode::kBottleneck;
  if (s == "adv_clf") return TrainMode::kAdversarialClassifier;
  if (s == "adv_cpc") return TrainMode::kAdversarialCpc;
  Fail(ErrorCode::kConfigError,
       "unknown mode '" + s + "' (expected plain, bottleneck, adv_clf or adv_cpc)");
}

const char* UpdateKindName(UpdateKind k) {
  switch (k) {
    case UpdateKind::kPlain: return "plain";
    case UpdateKind::kAdversary: return "adversary";
    case UpdateKind::kJoint: return "joint";
  }
  return "plain";
}

ObjectiveMode TrainConfig::objective() const {
  switch (mode) {
    case TrainMode::kAdversarialClassifier: return ObjectiveMode::kAdversarialClassifier;
    case TrainMode::kAdversarialCpc: return ObjectiveMode::kAdversarialCpc;
    default: return ObjectiveMode::kPlain;
  }
}

SegmentSpec TrainConfig::segment_spec() const {
  SegmentSpec s;
  s.batch = batch;
  s.min_seconds = min_seconds;
  s.max_seconds = max_seconds;
  s.paired = paired;
  s.paired_min_seconds = paired_min_seconds;
  s.paired_max_seconds = paired_max_seconds;
  return s;
}

void TrainConfig::Validate() const {
  FVAE_CHECK(steps >= 1 && batch >= 1, ErrorCode::kConfigError,
             "steps and batch must be positive");
  FVAE_CHECK(lr > 0.0, ErrorCode::kConfigError, "learning rate must be positive");
  FVAE_CHECK(clip.encoder > 0.0 && clip.decoder > 0.0 && clip.adversary > 0.0,
             ErrorCode::kConfigError, "clip thresholds must be positive");
  FVAE_CHECK(adv_steps_per_joint >= 0, ErrorCode::kConfigError,
             "adv_steps_per_joint must be >= 0");
  FVAE_CHECK(lambda >= 0.0, ErrorCode::kConfigError, "lambda must be >= 0");
  FVAE_CHECK(validate_every >= 1 && log_every >= 1, ErrorCode::kConfigError,
             "validate_every and log_every must be positive");
  FVAE_CHECK(min_seconds > 0.0 && max_seconds >= min_seconds && paired_min_seconds > 0.0 &&
                 paired_max_seconds >= paired_min_seconds,
             ErrorCode::kConfigError, "invalid segment lengths");
  FVAE_CHECK(!paired || batch % 2 == 0, ErrorCode::kConfigError,
             "paired mode needs an even batch size");
  FVAE_CHECK(model.n_mels == features.n_mels, ErrorCode::kConfigError,
             "model F differs from the feature band count");
  FVAE_CHECK(mode != TrainMode::kBottleneck || model.downsample == 32,
             ErrorCode::kConfigError, "bottleneck mode requires S_ds=32");
  model.Validate();
  features.Validate();
  if (has_adversary()) {
    FVAE_CHECK(adversary.input_dim == model.content_dim, ErrorCode::kConfigError,
               "adversary input width must equal D_z");
    const bool clf = mode == TrainMode::kAdversarialClassifier;
    FVAE_CHECK(clf == (adversary.kind == AdversaryKind::kSpeakerClassifier),
               ErrorCode::kConfigError, "adversary kind does not match the mode");
  }
}

std::string TrainConfig::ToJson() const {
  json j = {{"steps", steps},
            {"batch", batch},
            {"lr", lr},
            {"clip", {{"encoder", clip.encoder}, {"decoder", clip.decoder},
                      {"adversary", clip.adversary}}},
            {"adv_steps_per_joint", adv_steps_per_joint},
            {"mode", TrainModeName(mode)},
            {"paired", paired},
            {"vtlp", vtlp},
            {"seed", seed},
            {"lambda", lambda},
            {"validate_every", validate_every},
            {"log_every", log_every},
            {"min_seconds", min_seconds},
            {"max_seconds", max_seconds},
            {"paired_min_seconds", paired_min_seconds},
            {"paired_max_seconds", paired_max_seconds},
            {"max_validation_utterances", max_validation_utterances},
            {"reduction", reduction == Reduction::kSum ? "sum" : "mean_over_batch"},
            {"model", json::parse(model.ToJson())},
            {"adversary", AdversaryConfigJson(adversary)},
            {"features", json::parse(features.ToJson())}};
  return j.dump(2);
}

TrainConfig TrainConfig::FromJson(const std::string& text, const TrainConfig& base) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormatError, std::string("train config: ") + e.what());
  }
  FVAE_CHECK(user.is_object(), ErrorCode::kConfigError, "train config must be a JSON object");
  json j = json::parse(base.ToJson());
  for (auto it = user.begin(); it != user.end(); ++it)
    FVAE_CHECK(j.contains(it.key()), ErrorCode::kConfigError,
               "unknown train config key '" + it.key() + "'");
  j.merge_patch(user);
  TrainConfig c;
  try {
    c.steps = j.at("steps").get<long>();
    c.batch = j.at("batch").get<int>();
    c.lr = j.at("lr").get<double>();
    c.clip.encoder = j.at("clip").at("encoder").get<double>();
    c.clip.decoder = j.at("clip").at("decoder").get<double>();
    c.clip.adversary = j.at("clip").at("adversary").get<double>();
    c.adv_steps_per_joint = j.at("adv_steps_per_joint").get<int>();
    c.mode = ParseTrainMode(j.at("mode").get<std::string>());
    c.paired = j.at("paired").get<bool>();
    c.vtlp = j.at("vtlp").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.lambda = j.at("lambda").get<double>();
    c.validate_every = j.at("validate_every").get<int>();
    c.log_every = j.at("log_every").get<int>();
    c.min_seconds = j.at("min_seconds").get<double>();
    c.max_seconds = j.at("max_seconds").get<double>();
    c.paired_min_seconds = j.at("paired_min_seconds").get<double>();
    c.paired_max_seconds = j.at("paired_max_seconds").get<double>();
    c.max_validation_utterances = j.at("max_validation_utterances").get<int>();
    const std::string red = j.at("reduction").get<std::string>();
    FVAE_CHECK(red == "sum" || red == "mean_over_batch", ErrorCode::kConfigError,
               "reduction must be 'sum' or 'mean_over_batch'");
    c.reduction = red == "sum" ? Reduction::kSum : Reduction::kMeanOverBatch;
    c.model = ModelConfig::FromJson(j.at("model").dump());
    c.adversary = AdversaryConfigFromJson(j.at("adversary"));
    c.features = FeatureConfig::FromJson(j.at("features").dump());
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfigError, std::string("train config: ") + e.what());
  }
  return c;
}

TrainConfig PresetFor(TrainMode mode) {
  TrainConfig c;
  c.mode = mode;
  switch (mode) {
    case TrainMode::kPlain:
      break;
    case TrainMode::kBottleneck:
      c.model.downsample = 32;
      c.vtlp = true;
      break;
    case TrainMode::kAdversarialClassifier:
      c.paired = true;
      c.vtlp = true;
      c.lambda = 1.0;
      c.adversary.kind = AdversaryKind::kSpeakerClassifier;
      break;
    case TrainMode::kAdversarialCpc:
      c.vtlp = true;
      c.lambda = 2.0;
      c.adversary.kind = AdversaryKind::kCpc;
      c.adversary.cpc_steps = 100;
      break;
  }
  ApplyModeConstraints(c);
  return c;
}

void ApplyModeConstraints(TrainConfig& c) {
  if (c.mode == TrainMode::kBottleneck) c.model.downsample = 32;
  if (c.mode == TrainMode::kAdversarialClassifier)
    c.adversary.kind = AdversaryKind::kSpeakerClassifier;
  if (c.mode == TrainMode::kAdversarialCpc) c.adversary.kind = AdversaryKind::kCpc;
  c.adversary.input_dim = c.model.content_dim;
  c.model.n_mels = c.features.n_mels;
}

TrainConfig ResolveTrainConfig(const std::string* json_text, std::optional<TrainMode> mode) {
  TrainMode m = TrainMode::kPlain;
  if (mode) {
    m = *mode;
  } else if (json_text) {
    json j;
    try {
      j = json::parse(*json_text);
    } catch (const json::exception& e) {
      Fail(ErrorCode::kFormatError, std::string("train config: ") + e.what());
    }
    if (j.contains("mode")) m = ParseTrainMode(j["mode"].get<std::string>());
  }
  TrainConfig c = PresetFor(m);
  if (json_text) c = TrainConfig::FromJson(*json_text, c);
  c.mode = m;
  ApplyModeConstraints(c);
  return c;
}

// ---------------------------------------------------------------------------

UpdateSchedule::UpdateSchedule(bool adversarial, int adversary_steps_per_joint)
    : adversarial_(adversarial), k_(adversary_steps_per_joint) {}

UpdateKind UpdateSchedule::Next() {
  if (!adversarial_) {
    ++plain_steps_;
    return UpdateKind::kPlain;
  }
  const long pos = position_++ % (k_ + 1);
  if (pos < k_) {
    ++adversary_steps_;
    return UpdateKind::kAdversary;
  }
  ++joint_steps_;
  return UpdateKind::kJoint;
}

// ---------------------------------------------------------------------------

Trainer::Trainer(TrainConfig cfg, const FeatureBank& bank)
    : cfg_(std::move(cfg)),
      bank_(bank),
      rng_(DeriveSeed(cfg_.seed, 12)),
      schedule_(cfg_.has_adversary(), cfg_.adv_steps_per_joint) {
  ApplyModeConstraints(cfg_);
  cfg_.features = bank.config;
  cfg_.model.n_mels = bank.config.n_mels;
  if (cfg_.mode == TrainMode::kAdversarialClassifier)
    cfg_.adversary.n_speakers = static_cast<int>(bank.speakers.size());
  cfg_.model.init_seed = DeriveSeed(cfg_.seed, 10);
  cfg_.Validate();
  FVAE_CHECK(!bank.train.empty(), ErrorCode::kInsufficientData, "empty training split");
  if (cfg_.vtlp)
    for (const auto& u : bank.train)
      FVAE_CHECK(u.power.cols() == u.normalized.frames(), ErrorCode::kConfigError,
                 "VTLP needs power spectra of the training split");

  Rng init(cfg_.model.init_seed);
  model_ = std::make_unique<FactorizedVae<float>>(cfg_.model, init);
  nn::AdamConfig adam;
  adam.lr = cfg_.lr;
  vae_opt_ = std::make_unique<nn::Adam<float>>(model_->Parameters(), adam);
  if (cfg_.has_adversary()) {
    Rng adv_init(DeriveSeed(cfg_.seed, 11));
    adversary_ = std::make_unique<Adversary<float>>(cfg_.adversary, adv_init);
    adv_opt_ = std::make_unique<nn::Adam<float>>(adversary_->Parameters(), adam);
  }
  model_->ZeroGrad();
  if (adversary_) adversary_->ZeroGrad();
}

Trainer::~Trainer() = default;

TrainBatch Trainer::SampleBatch() {
  const SegmentBatch seg = SampleSegmentBatch(bank_.train, cfg_.segment_spec(), bank_.config, rng_);
  const int B = seg.batch_size, T = seg.crop_frames;
  TrainBatch out;
  out.target = nn::Seq<float>(seg.features, B, T);
  out.content_input = nn::Seq<float>(seg.bands, B, T);
  for (int b = 0; b < B; ++b) {
    MelSpectrogram x;
    if (cfg_.vtlp) {
      const SegmentRef& ref = seg.items[b];
      const MelFilterbank fb = BuildWarpedFilterbank(bank_.config, SampleVtlpParams(rng_));
      x = ApplyGlobalNorm(
          LogMelFromPower(bank_.train[ref.utterance].power.middleCols(ref.start, ref.frames), fb,
                          bank_.config),
          bank_.stats);
    } else {
      x.values = out.target.item(b);
      x.norm_state = NormState::kGlobal;
    }
    out.content_input.item(b) = InstanceNormalize(x).values;
  }
  out.speaker_input = seg.pair_features ? nn::Seq<float>(*seg.pair_features, B, T) : out.target;
  out.speakers = seg.speaker_ids;
  return out;
}

void Trainer::CheckFinite(const LossBreakdown& loss, const TrainBatch& batch) const {
  if (std::isfinite(loss.l_total)) return;
  std::ostringstream os;
  os << "non-finite loss at step " << step_ << " (l_rec " << loss.l_rec << ", l_kld "
     << loss.l_kld << ", l_adv " << loss.l_adv << "); last batch: "
     << MatrixSummary("target", batch.target.data) << "; "
     << MatrixSummary("content_input", batch.content_input.data) << "; "
     << MatrixSummary("speaker_input", batch.speaker_input.data);
  Fail(ErrorCode::kNumericalError, os.str());
}

StepStats Trainer::PlainOrJointStep(const TrainBatch& batch, bool joint) {
  FVAE_CHECK(!joint || adversary_, ErrorCode::kConfigError, "joint step without adversary");
  FactorizedVae<float>& m = *model_;
  m.SetTraining(true);
  m.ZeroGrad();
  const float beta = static_cast<float>(cfg_.model.beta);

  const Posterior<float> post = m.EncodeContent(batch.content_input);
  nn::Matrix<float> eps;
  const nn::Seq<float> z =
      FactorizedVae<float>::Reparameterize(post, ForwardMode::kTrain, rng_, &eps);
  const nn::Seq<float> s = m.EncodeSpeaker(batch.speaker_input);
  const nn::Seq<float> xhat = m.Decode(z, s, batch.target.frames);
  LossGrad<float> rec = ReconstructionLoss(xhat, batch.target, cfg_.reduction);
  const KlGrad<float> kl = KlLoss(post.mu, post.log_var, cfg_.reduction);

  double l_adv = 0.0;
  nn::Seq<float> d_mu_adv;
  if (joint) {
    adversary_->SetTraining(true);
    adversary_->ZeroGrad();
    AdversaryResult<float> res = adversary_->LossAndBackward(
        post.mu, cfg_.mode == TrainMode::kAdversarialClassifier ? &batch.speakers : nullptr,
        cfg_.reduction);
    l_adv = res.loss;
    d_mu_adv = std::move(res.d_input);
  }

  StepStats st;
  st.kind = joint ? UpdateKind::kJoint : UpdateKind::kPlain;
  st.loss = Combine(rec.value, kl.value, l_adv, cfg_.objective(), cfg_.model.beta, cfg_.lambda);
  CheckFinite(st.loss, batch);

  auto [dz, ds] = m.BackwardDecode(nn::Seq<float>(std::move(rec.grad), xhat.batch, xhat.frames));
  m.BackwardSpeaker(ds);
  nn::Seq<float> d_mu(kl.d_mu * beta, post.mu.batch, post.mu.frames);
  nn::Seq<float> d_lv(kl.d_log_var * beta, post.mu.batch, post.mu.frames);
  FactorizedVae<float>::ReparameterizeBackward(post, eps, dz, d_mu, d_lv);
  if (joint) d_mu.data -= static_cast<float>(cfg_.lambda) * d_mu_adv.data;
  m.BackwardContent(d_mu, d_lv);

  st.grad_norm_content = nn::ClipGradNorm(m.ContentParams(), cfg_.clip.encoder);
  st.grad_norm_speaker = nn::ClipGradNorm(m.SpeakerParams(), cfg_.clip.encoder);
  st.grad_norm_decoder = nn::ClipGradNorm(m.DecoderParams(), cfg_.clip.decoder);
  vae_opt_->Step();
  if (joint) {
    st.grad_norm_adversary = nn::ClipGradNorm(adversary_->Parameters(), cfg_.clip.adversary);
    adv_opt_->Step();
  }
  ++step_;
  st.step = step_;
  return st;
}

double Trainer::AdversaryOnlyStep(const TrainBatch& batch) {
  FVAE_CHECK(adversary_ != nullptr, ErrorCode::kConfigError, "no adversary configured");
  model_->SetTraining(true);
  const nn::Seq<float> mu = model_->EncodeContent(batch.content_input).mu;
  adversary_->SetTraining(true);
  return AdversaryStep(
      *adversary_, *adv_opt_, mu,
      cfg_.mode == TrainMode::kAdversarialClassifier ? &batch.speakers : nullptr,
      cfg_.clip.adversary, cfg_.reduction);
}

StepStats Trainer::Step() {
  const UpdateKind kind = schedule_.Next();
  const TrainBatch batch = SampleBatch();
  if (kind == UpdateKind::kAdversary) {
    StepStats st;
    st.kind = kind;
    st.step = step_;
    st.loss.l_adv = AdversaryOnlyStep(batch);
    st.loss.mode = cfg_.objective();
    return st;
  }
  return PlainOrJointStep(batch, kind == UpdateKind::kJoint);
}

double Trainer::Validate() {
  const auto& pool = bank_.validation;
  FVAE_CHECK(!pool.empty(), ErrorCode::kInsufficientData, "empty validation split");
  std::size_t n = pool.size();
  if (cfg_.max_validation_utterances > 0)
    n = std::min(n, static_cast<std::size_t>(cfg_.max_validation_utterances));
  FactorizedVae<float>& m = *model_;
  m.SetTraining(false);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const MelSpectrogram& x = pool[i].normalized;
    const nn::Seq<float> target = FactorizedVae<float>::FromMel(x);
    const Posterior<float> post =
        m.EncodeContent(FactorizedVae<float>::FromMel(InstanceNormalize(x)));
    const nn::Seq<float> s = m.EncodeSpeaker(target);
    const nn::Seq<float> xhat = m.Decode(post.mu, s, x.frames());
    total += ReconstructionLoss(xhat, target, Reduction::kSum).value;
  }
  m.SetTraining(true);
  const double v = total / static_cast<double>(n);
  FVAE_CHECK(std::isfinite(v), ErrorCode::kNumericalError, "non-finite validation loss");
  return v;
}

void Trainer::SaveModelCheckpoint(const std::string& path, long step, double val_l_rec) {
  TensorArchive a;
  a.config_hash = cfg_.model.Hash();
  a.metadata = json{{"kind", "model"},
                    {"step", step},
                    {"val_l_rec", val_l_rec},
                    {"mode", TrainModeName(cfg_.mode)},
                    {"seed", cfg_.seed}}
                   .dump();
  StoreParams(a, model_->State());
  StoreOptimizer(a, "optim.vae", *vae_opt_);
  SaveArchive(path, a);
}

void Trainer::SaveAdversaryCheckpoint(const std::string& path, long step) {
  FVAE_CHECK(adversary_ != nullptr, ErrorCode::kConfigError, "no adversary configured");
  TensorArchive a;
  a.config_hash = cfg_.model.Hash();
  a.metadata = json{{"kind", "adversary"},
                    {"step", step},
                    {"adversary_steps", schedule_.adversary_steps()},
                    {"joint_steps", schedule_.joint_steps()},
                    {"config", AdversaryConfigJson(cfg_.adversary)}}
                   .dump();
  StoreParams(a, adversary_->State());
  StoreOptimizer(a, "optim.adversary", *adv_opt_);
  SaveArchive(path, a);
}

TrainResult Trainer::Train(const std::string& out_dir, std::ostream* progress) {
  namespace fs = std::filesystem;
  std::ofstream log;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    WriteTextFile(out_dir + "/model_config.json", cfg_.model.ToJson());
    WriteTextFile(out_dir + "/train_config.json", cfg_.ToJson());
    bank_.stats.Save(out_dir + "/feature_stats.json");
    log.open(out_dir + "/train_log.jsonl");
    FVAE_CHECK(log.good(), ErrorCode::kIoError, "cannot write training log in " + out_dir);
  }

  TrainResult result;
  result.best_val_l_rec = std::numeric_limits<double>::infinity();
  std::vector<nn::Param<float>*> state = model_->State();
  std::vector<Eigen::MatrixXf> best;

  double adv_loss_sum = 0.0;
  long adv_loss_count = 0;
  while (step_ < cfg_.steps) {
    const StepStats st = Step();
    if (st.kind == UpdateKind::kAdversary) {
      adv_loss_sum += st.loss.l_adv;
      ++adv_loss_count;
      continue;
    }
    result.history.push_back(st);
    if (log.is_open() && (step_ == 1 || step_ % cfg_.log_every == 0)) {
      json e = {{"step", step_},
                {"kind", UpdateKindName(st.kind)},
                {"l_rec", st.loss.l_rec},
                {"l_kld", st.loss.l_kld},
                {"l_adv", st.loss.l_adv},
                {"l_total", st.loss.l_total}};
      if (adv_loss_count > 0) e["l_adv_adversary_steps"] = adv_loss_sum / adv_loss_count;
      log << e.dump() << "\n";
      adv_loss_sum = 0.0;
      adv_loss_count = 0;
    }
    if (step_ % cfg_.validate_every == 0 || step_ == cfg_.steps) {
      const double v = Validate();
      result.validation.emplace_back(step_, v);
      const bool improved = v < result.best_val_l_rec;
      if (improved) {
        result.best_val_l_rec = v;
        result.best_step = step_;
        best.clear();
        for (auto* p : state) best.push_back(p->value);
        if (!out_dir.empty()) SaveModelCheckpoint(out_dir + "/model.ckpt", step_, v);
      }
      if (log.is_open()) {
        log << json{{"step", step_}, {"val_l_rec", v}, {"best", improved}}.dump() << "\n";
        log.flush();
      }
      if (progress)
        *progress << "step " << step_ << " l_rec " << st.loss.l_rec << " l_adv "
                  << st.loss.l_adv << " val_l_rec " << v << (improved ? " *" : "") << "\n";
    }
  }
  if (adversary_ && !out_dir.empty())
    SaveAdversaryCheckpoint(out_dir + "/adversary.ckpt", step_);
  for (std::size_t i = 0; i < state.size() && i < best.size(); ++i) state[i]->value = best[i];
  model_->SetTraining(false);
  result.steps = step_;
  result.adversary_steps = schedule_.adversary_steps();
  result.joint_steps = schedule_.joint_steps();
  return result;
}

// ---------------------------------------------------------------------------

std::string ReadTextFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  FVAE_CHECK(is.good(), ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  FVAE_CHECK(os.good(), ErrorCode::kIoError, "cannot write " + path);
  os << text;
  FVAE_CHECK(os.good(), ErrorCode::kIoError, "failed writing " + path);
}

ModelBundle LoadModelBundle(const std::string& dir) {
  ModelBundle b;
  b.config = ModelConfig::FromJson(ReadTextFile(dir + "/model_config.json"));
  b.stats = FeatureStats::Load(dir + "/feature_stats.json");
  const std::string train_cfg = dir + "/train_config.json";
  if (std::filesystem::exists(train_cfg)) {
    const json j = json::parse(ReadTextFile(train_cfg), nullptr, false);
    FVAE_CHECK(!j.is_discarded(), ErrorCode::kFormatError, "malformed " + train_cfg);
    if (j.contains("features")) b.features = FeatureConfig::FromJson(j["features"].dump());
  }
  const std::string ckpt = dir + "/model.ckpt";
  const TensorArchive a = LoadArchive(ckpt);
  FVAE_CHECK(a.config_hash == b.config.Hash(), ErrorCode::kFormatError,
             "checkpoint does not match model_config.json");
  const json meta = json::parse(a.metadata, nullptr, false);
  if (!meta.is_discarded()) {
    b.step = meta.value("step", 0L);
    b.val_l_rec = meta.value("val_l_rec", 0.0);
  }
  b.checkpoint_hash = Fnv1a(ReadTextFile(ckpt));
  Rng rng(b.config.init_seed);
  b.model = std::make_unique<FactorizedVae<float>>(b.config, rng);
  RestoreParams(a, b.model->State());
  b.model->SetTraining(false);
  return b;
}

FeatureBank LoadFeatureBank(const std::string& manifest_path, const FeatureConfig& cfg,
                            bool keep_train_power, const FeatureStats* stats) {
  const SplitManifest manifest = ReadManifest(manifest_path);
  const AudioLoader load = [&cfg](const UtteranceRecord& r) {
    AudioClip clip = ReadWav(r.path);
    FVAE_CHECK(clip.sample_rate == cfg.sample_rate, ErrorCode::kConfigError,
               r.path + ": sample rate " + std::to_string(clip.sample_rate) + " != " +
                   std::to_string(cfg.sample_rate));
    return clip;
  };
  return BuildFeatureBank(manifest, load, cfg, keep_train_power, stats);
}

}  // namespace fvae
