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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "fvae/checkpoint.hpp"
#include "fvae/error.hpp"
#include "fvae/trainer.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace fvae {
namespace {

TrainConfig Tiny(TrainMode mode) {
  TrainConfig c = PresetFor(mode);
  c.model.hidden = 16;
  c.model.n_resblocks = 1;
  c.adversary.hidden = 16;
  c.adversary.n_resblocks = 1;
  c.adversary.cpc_steps = 20;
  c.batch = 4;
  c.min_seconds = c.max_seconds = 0.5;
  c.paired_min_seconds = c.paired_max_seconds = 1.0;
  c.steps = 10;
  c.validate_every = 5;
  c.max_validation_utterances = 3;
  return c;
}

// Order-sensitive hash of the bit patterns of a parameter list.
template <typename P>
std::uint64_t HashParams(const std::vector<P*>& params) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const P* p : params) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p->value.data());
    for (std::size_t i = 0; i < p->value.size() * sizeof(float); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

TEST_CASE("update schedule") {
  UpdateSchedule s(true, 3);
  for (int i = 0; i < 8; ++i) s.Next();
  CHECK(s.adversary_steps() == 6);
  CHECK(s.joint_steps() == 2);

  UpdateSchedule long_run(true, 3);
  std::vector<UpdateKind> first;
  for (int i = 0; i < 1000; ++i) {
    const UpdateKind k = long_run.Next();
    if (i < 4) first.push_back(k);
    REQUIRE(std::abs(long_run.adversary_steps() - 3 * long_run.joint_steps()) <= 3);
  }
  CHECK(long_run.adversary_steps() == 750);
  CHECK(long_run.joint_steps() == 250);
  CHECK(first == std::vector<UpdateKind>{UpdateKind::kAdversary, UpdateKind::kAdversary,
                                         UpdateKind::kAdversary, UpdateKind::kJoint});

  UpdateSchedule plain(false, 3);
  for (int i = 0; i < 10; ++i) CHECK(plain.Next() == UpdateKind::kPlain);
  CHECK(plain.plain_steps() == 10);
}

TEST_CASE("mode presets") {
  const TrainConfig cpc = PresetFor(TrainMode::kAdversarialCpc);
  CHECK(cpc.lambda == 2.0);
  CHECK(cpc.model.beta == 1e-3);
  CHECK(cpc.adversary.kind == AdversaryKind::kCpc);
  CHECK(cpc.adversary.cpc_steps == 100);
  CHECK(cpc.adversary.cpc_dim == 256);
  CHECK(cpc.vtlp);
  CHECK_FALSE(cpc.paired);
  CHECK(cpc.lr == 5e-4);
  CHECK(cpc.batch == 48);
  CHECK(cpc.steps == 100000);
  CHECK(cpc.clip.encoder == 10.0);
  CHECK(cpc.clip.decoder == 20.0);
  CHECK(cpc.clip.adversary == 2.0);
  CHECK(cpc.adv_steps_per_joint == 3);

  const TrainConfig clf = PresetFor(TrainMode::kAdversarialClassifier);
  CHECK(clf.lambda == 1.0);
  CHECK(clf.paired);
  CHECK(clf.adversary.kind == AdversaryKind::kSpeakerClassifier);

  const TrainConfig bn = PresetFor(TrainMode::kBottleneck);
  CHECK(bn.model.downsample == 32);
  CHECK(bn.model.content_dim == 32);
  CHECK_FALSE(bn.paired);
  CHECK_FALSE(bn.has_adversary());

  const TrainConfig plain = PresetFor(TrainMode::kPlain);
  CHECK(plain.model.downsample == 1);
  CHECK(plain.objective() == ObjectiveMode::kPlain);

  std::string text = "{\"model\": {\"downsample\": 4}}";
  const TrainConfig forced = ResolveTrainConfig(&text, TrainMode::kBottleneck);
  CHECK(forced.model.downsample == 32);

  CHECK_THROWS_AS(ParseTrainMode("adv_gan"), Error);
  for (TrainMode m : {TrainMode::kPlain, TrainMode::kBottleneck,
                      TrainMode::kAdversarialClassifier, TrainMode::kAdversarialCpc})
    CHECK(ParseTrainMode(TrainModeName(m)) == m);
}

TEST_CASE("train config json") {
  TrainConfig c = Tiny(TrainMode::kAdversarialCpc);
  c.seed = 17;
  c.reduction = Reduction::kSum;
  const TrainConfig back = TrainConfig::FromJson(c.ToJson());
  CHECK(back.ToJson() == c.ToJson());

  const TrainConfig patched = TrainConfig::FromJson("{\"steps\": 7, \"clip\": {\"decoder\": 5}}", c);
  CHECK(patched.steps == 7);
  CHECK(patched.clip.decoder == 5.0);
  CHECK(patched.clip.encoder == 10.0);
  CHECK(patched.seed == 17);

  try {
    TrainConfig::FromJson("{\"stepz\": 7}");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigError);
  }
  CHECK_THROWS_AS(TrainConfig::FromJson("{not json"), Error);
  TrainConfig odd = PresetFor(TrainMode::kAdversarialClassifier);
  odd.batch = 5;
  CHECK_THROWS_AS(odd.Validate(), Error);
}

TEST_CASE("batches") {
  const FeatureBank& bank = testing::SmallToyBank();
  {
    TrainConfig c = Tiny(TrainMode::kPlain);
    Trainer tr(c, bank);
    const TrainBatch b = tr.SampleBatch();
    CHECK(b.target.batch == 4);
    CHECK(b.target.frames == 50);
    CHECK(b.speaker_input.data == b.target.data);
    for (int i = 0; i < 4; ++i) {
      MelSpectrogram x;
      x.values = b.target.item(i);
      x.norm_state = NormState::kGlobal;
      CHECK((InstanceNormalize(x).values - b.content_input.item(i)).cwiseAbs().maxCoeff() ==
            0.0f);
    }
  }
  {
    TrainConfig c = Tiny(TrainMode::kAdversarialCpc);
    Trainer tr(c, bank);
    const TrainBatch b = tr.SampleBatch();
    CHECK(b.speaker_input.data == b.target.data);
    double diff = 0.0;
    for (int i = 0; i < 4; ++i) {
      MelSpectrogram x;
      x.values = b.target.item(i);
      x.norm_state = NormState::kGlobal;
      diff += (InstanceNormalize(x).values - b.content_input.item(i)).cwiseAbs().mean();
    }
    CHECK(diff > 1e-3);
  }
  {
    TrainConfig c = Tiny(TrainMode::kAdversarialClassifier);
    Trainer tr(c, bank);
    const TrainBatch b = tr.SampleBatch();
    CHECK(b.target.frames == 50);
    CHECK(b.speaker_input.data != b.target.data);
    CHECK(b.speakers[0] == b.speakers[1]);
    CHECK(b.speaker_input.item(0) == b.target.item(1));
  }
}

TEST_CASE("clipping in the trainer") {
  const FeatureBank& bank = testing::SmallToyBank();
  Trainer tr(Tiny(TrainMode::kPlain), bank);
  auto params = tr.model().ContentParams();
  Rng rng(4);
  for (auto* p : params)
    p->grad = testing::RandomMatrix(p->value.rows(), p->value.cols(), rng).cast<float>();
  const double raw = nn::GradNorm(params);
  for (auto* p : params) p->grad *= static_cast<float>(100.0 / raw);
  const Eigen::MatrixXf direction = params[0]->grad;
  const double before = nn::ClipGradNorm(params, tr.config().clip.encoder);
  CHECK(before == doctest::Approx(100.0).epsilon(1e-5));
  CHECK(nn::GradNorm(params) == doctest::Approx(10.0).epsilon(1e-5));
  CHECK((params[0]->grad - direction * 0.1f).cwiseAbs().maxCoeff() < 1e-6f);

  const Eigen::MatrixXf small = params[0]->grad;
  nn::ClipGradNorm(params, 50.0);
  CHECK(params[0]->grad == small);

  // The stats of a real step report the pre-clip norms.
  const StepStats st = tr.Step();
  CHECK(st.grad_norm_content > 0.0);
  CHECK(st.grad_norm_decoder > 0.0);
}

TEST_CASE("adversary-only steps leave the VAE untouched") {
  const FeatureBank& bank = testing::SmallToyBank();
  for (TrainMode mode : {TrainMode::kAdversarialCpc, TrainMode::kAdversarialClassifier}) {
    CAPTURE(TrainModeName(mode));
    Trainer tr(Tiny(mode), bank);
    const std::uint64_t vae0 = HashParams(tr.model().State());
    const std::uint64_t adv0 = HashParams(tr.adversary()->Parameters());
    for (int i = 0; i < 3; ++i) CHECK(tr.Step().kind == UpdateKind::kAdversary);
    CHECK(HashParams(tr.model().State()) == vae0);
    const std::uint64_t adv1 = HashParams(tr.adversary()->Parameters());
    CHECK(adv1 != adv0);
    const StepStats joint = tr.Step();
    CHECK(joint.kind == UpdateKind::kJoint);
    CHECK(joint.step == 1);
    CHECK(HashParams(tr.model().Parameters()) != vae0);
    CHECK(HashParams(tr.adversary()->Parameters()) != adv1);
    CHECK(joint.loss.l_adv > 0.0);
    CHECK(joint.loss.l_total ==
          doctest::Approx(joint.loss.l_rec + tr.config().model.beta * joint.loss.l_kld -
                          tr.config().lambda * joint.loss.l_adv));
  }
}

TEST_CASE("determinism") {
  const FeatureBank& bank = testing::SmallToyBank();
  auto run = [&](std::uint64_t seed) {
    TrainConfig c = Tiny(TrainMode::kAdversarialCpc);
    c.seed = seed;
    Trainer tr(c, bank);
    std::vector<double> losses;
    while (tr.step() < 12) {
      const StepStats st = tr.Step();
      if (st.kind == UpdateKind::kJoint) losses.push_back(st.loss.l_total);
    }
    return losses;
  };
  const auto a = run(3), b = run(3), c = run(4);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("plain training smoke run and artifacts") {
  const FeatureBank& bank = testing::SmallToyBank();
  TrainConfig c = Tiny(TrainMode::kPlain);
  c.batch = 8;
  c.steps = 200;
  c.validate_every = 50;
  c.log_every = 10;
  const auto dir = std::filesystem::temp_directory_path() / "fvae_trainer_test";
  std::filesystem::remove_all(dir);
  Trainer tr(c, bank);
  const TrainResult r = tr.Train(dir.string());
  REQUIRE(r.history.size() == 200u);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 10; ++i) {
    head += r.history[i].loss.l_rec;
    tail += r.history[190 + i].loss.l_rec;
  }
  MESSAGE("l_rec first 10 " << head / 10 << ", last 10 " << tail / 10);
  CHECK(tail <= 0.5 * head);
  CHECK(r.validation.size() == 4u);
  CHECK(r.best_val_l_rec == tr.Validate());
  CHECK(tr.Validate() == tr.Validate());

  for (const char* f : {"model.ckpt", "model_config.json", "train_config.json",
                        "feature_stats.json", "train_log.jsonl"})
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  std::ifstream log(dir / "train_log.jsonl");
  std::string line;
  int losses = 0, validations = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.contains("val_l_rec")) {
      ++validations;
    } else {
      ++losses;
      for (const char* k : {"step", "l_rec", "l_kld", "l_adv", "l_total"}) CHECK(j.contains(k));
    }
  }
  CHECK(losses == 21);
  CHECK(validations == 4);

  ModelBundle bundle = LoadModelBundle(dir.string());
  CHECK(bundle.step == r.best_step);
  CHECK(bundle.val_l_rec == doctest::Approx(r.best_val_l_rec));
  const MelSpectrogram& x = bank.validation[0].normalized;
  CHECK(bundle.model->Convert(x, x).values == tr.model().Convert(x, x).values);

  const TrainConfig saved = TrainConfig::FromJson(ReadTextFile((dir / "train_config.json").string()));
  CHECK(saved.seed == c.seed);
  CHECK(saved.model.init_seed == DeriveSeed(c.seed, 10));
  std::filesystem::remove_all(dir);
}

TEST_CASE("failures") {
  const FeatureBank& bank = testing::SmallToyBank();
  FeatureBank empty_val = bank;
  empty_val.validation.clear();
  Trainer tr(Tiny(TrainMode::kPlain), empty_val);
  try {
    tr.Validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientData);
  }

  Trainer broken(Tiny(TrainMode::kPlain), bank);
  broken.model().DecoderParams().front()->value(0, 0) = std::numeric_limits<float>::quiet_NaN();
  try {
    broken.Step();
    FAIL("expected NumericalError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumericalError);
    CHECK(std::string(e.what()).find("target") != std::string::npos);
  }

  FeatureBank no_power = bank;
  for (auto& u : no_power.train) u.power.resize(0, 0);
  CHECK_THROWS_AS(Trainer(Tiny(TrainMode::kAdversarialCpc), no_power), Error);
}

TEST_CASE("checkpoint archive") {
  const auto path = std::filesystem::temp_directory_path() / "fvae_archive_test.ckpt";
  TensorArchive a;
  a.config_hash = 1234567890123ULL;
  a.metadata = "{\"step\": 3}";
  Rng rng(1);
  a.tensors["x.weight"] = testing::RandomMatrix(3, 5, rng).cast<float>();
  a.tensors["y"] = Eigen::MatrixXf::Constant(1, 1, 2.5f);
  SaveArchive(path.string(), a);
  const TensorArchive b = LoadArchive(path.string());
  CHECK(b.format_version == kCheckpointVersion);
  CHECK(b.config_hash == a.config_hash);
  CHECK(b.metadata == a.metadata);
  CHECK(b.at("x.weight") == a.tensors["x.weight"]);
  CHECK_FALSE(b.contains("z"));
  CHECK_THROWS_AS(b.at("z"), Error);

  nn::Param<float> wrong;
  wrong.name = "x.weight";
  wrong.value = Eigen::MatrixXf::Zero(5, 3);
  try {
    RestoreParams<float>(b, {&wrong});
    FAIL("expected ShapeError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeError);
  }
  {
    std::ofstream f(path, std::ios::binary);
    f << "NOTACKPT";
  }
  CHECK_THROWS_AS(LoadArchive(path.string()), Error);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace fvae
