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
#include <set>

#include "doctest.h"
#include "fvae/error.hpp"
#include "fvae/evaluation.hpp"
#include "fvae/trainer.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace fvae {
namespace {

ProbeConfig SmallProbe() {
  ProbeConfig pc;
  pc.hidden = 16;
  pc.n_resblocks = 1;
  pc.steps = 600;
  pc.batch = 8;
  pc.validate_every = 100;
  pc.patience = 3;
  pc.min_seconds = 0.5;
  pc.max_seconds = 1.0;
  return pc;
}

// Oracle probes and a briefly trained plain model, shared by several cases.
struct Fixture {
  const FeatureBank& bank = testing::SmallToyBank();
  OracleProbes oracle;
  std::unique_ptr<Trainer> trainer;
  Fixture() {
    oracle = TrainOracleProbes(bank, SmallProbe());
    TrainConfig c = PresetFor(TrainMode::kPlain);
    c.model.hidden = 16;
    c.model.n_resblocks = 1;
    c.batch = 8;
    c.min_seconds = c.max_seconds = 1.0;
    c.steps = 300;
    c.validate_every = 100;
    trainer = std::make_unique<Trainer>(c, bank);
    trainer->Train("");
  }
};

Fixture& Shared() {
  static Fixture f;
  return f;
}

EvaluationReport SampleReport() {
  EvaluationReport r;
  r.source_spk_acc = 0.005;
  r.target_spk_acc = 0.914;
  r.phone_acc = 0.787;
  r.clean_source_spk_acc = 0.983;
  r.clean_target_spk_acc = 0.004;
  r.clean_phone_acc = 0.856;
  r.probe_spk_acc_one_pass = 0.567;
  r.probe_phone_acc_one_pass = 0.836;
  r.probe_spk_acc_two_pass = 0.173;
  r.probe_phone_acc_two_pass = 0.822;
  r.model_id = "runs/cpc";
  r.checkpoint_hash = HashHex(0x0123456789abcdefULL);
  r.corpus = "toy";
  r.mode = "adv_cpc";
  r.seed = 7;
  return r;
}

TEST_CASE("frame accuracy micro average matches a recount") {
  Rng rng(1);
  AccuracyCount total;
  long correct = 0, frames = 0;
  for (int u = 0; u < 30; ++u) {
    const int n = UniformInt(rng, 1, 200);
    std::vector<int> pred(n), lab(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = UniformInt(rng, 0, 4);
      lab[i] = UniformInt(rng, -1, 4);
    }
    total += FrameAccuracy(pred, lab);
    for (int i = 0; i < n; ++i) {
      if (lab[i] < 0) continue;
      ++frames;
      if (pred[i] == lab[i]) ++correct;
    }
  }
  CHECK(std::abs(total.value() - static_cast<double>(correct) / frames) < 1e-9);
  CHECK_THROWS_AS(FrameAccuracy({1, 2}, {1}), Error);
}

TEST_CASE("report serialisation") {
  const EvaluationReport r = SampleReport();
  const EvaluationReport back = EvaluationReport::FromJson(r.ToJson());
  CHECK(back.ToJson() == r.ToJson());
  CHECK(back.checkpoint_hash == "0123456789abcdef");

  const auto path = std::filesystem::temp_directory_path() / "fvae_report_test.json";
  WriteReport(path.string(), r);
  CHECK(ReadReport(path.string()).ToJson() == r.ToJson());
  std::filesystem::remove(path);

  for (const char* drop : {"/conversion/phone_acc", "/posthoc/two_pass/speaker",
                           "/clean/source_spk_acc", "/metadata/checkpoint_hash"}) {
    nlohmann::json j = nlohmann::json::parse(r.ToJson());
    const nlohmann::json::json_pointer p(drop);
    j[p.parent_pointer()].erase(p.back());
    try {
      EvaluationReport::FromJson(j.dump());
      FAIL("missing field accepted: " << drop);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kFormatError);
    }
  }
  EvaluationReport bad = r;
  bad.phone_acc = 1.5;
  CHECK_THROWS_AS(bad.Validate(), Error);

  const std::string csv = r.ToCsv();
  CHECK(csv.find("method,source_spk_acc") == 0);
  CHECK(csv.find("\nclean,0.983,0.004,0.856") != std::string::npos);
  CHECK(csv.find("\nadv_cpc,0.005,0.914,0.787,0.567,0.836,0.173,0.822") != std::string::npos);
}

TEST_CASE("probe shapes and alignment") {
  Rng rng(2);
  ProbeConfig pc = SmallProbe();
  pc.domain = ProbeDomain::kEmbedding;
  pc.n_classes = 5;
  pc.input_dim = 32;
  pc.downsample = 32;
  Probe emb(pc, rng);
  const nn::Seq<float> out = emb.Forward(nn::Seq<float>(32, 1, 8));
  CHECK(out.channels() == 5);
  CHECK(out.frames == 256);
  CHECK(emb.Predict(Eigen::MatrixXf::Zero(32, 8), 250).size() == 250u);
  emb.CheckAlignment({Eigen::MatrixXf::Zero(32, 8), std::vector<int>(250, 0)});
  try {
    emb.CheckAlignment({Eigen::MatrixXf::Zero(32, 7), std::vector<int>(250, 0)});
    FAIL("expected AlignmentError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAlignmentError);
  }

  pc.domain = ProbeDomain::kSpectrogram;
  pc.input_dim = 80;
  pc.downsample = 1;
  Probe spec(pc, rng);
  CHECK(spec.OutputFrames(123) == 123);
  try {
    spec.CheckAlignment({Eigen::MatrixXf::Zero(80, 100), std::vector<int>(99, 0)});
    FAIL("expected AlignmentError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAlignmentError);
  }
  ProbeData data;
  data.train.push_back({Eigen::MatrixXf::Zero(80, 100), std::vector<int>(98, 0)});
  data.validation = data.train;
  CHECK_THROWS_AS(TrainProbe(spec, data), Error);

  const auto path = std::filesystem::temp_directory_path() / "fvae_probe_test.ckpt";
  spec.Save(path.string());
  auto loaded = Probe::Load(path.string());
  const Eigen::MatrixXf x = testing::RandomMatrix(80, 60, rng).cast<float>();
  CHECK(loaded->Predict(x, 60) == spec.Predict(x, 60));
  CHECK(loaded->config().ToJson() == spec.config().ToJson());
  std::filesystem::remove(path);
}

TEST_CASE("probe on shuffled labels is at chance") {
  const FeatureBank& bank = testing::SmallToyBank();
  Rng rng(3);
  auto noisy = [&](const std::vector<UtteranceFeatures>& pool) {
    std::vector<ProbeExample> out = SpectrogramExamples(pool, ProbeTarget::kSpeaker);
    for (auto& e : out)
      for (int& l : e.labels) l = UniformInt(rng, 0, 3);
    return out;
  };
  ProbeConfig pc = SmallProbe();
  pc.n_classes = 4;
  ProbeData data{noisy(bank.train), noisy(bank.validation)};
  auto probe = TrainNewProbe(pc, data);
  const double acc = EvaluateProbe(*probe, noisy(bank.test)).value();
  MESSAGE("shuffled-label accuracy " << std::to_string(acc));
  CHECK(std::abs(acc - 0.25) <= 0.05);
}

TEST_CASE("conversion partners") {
  const FeatureBank& bank = testing::SmallToyBank();
  const std::vector<int> p = ConversionPartners(bank.test, 5);
  REQUIRE(p.size() == bank.test.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(bank.test[p[i]].speaker != bank.test[i].speaker);
  CHECK(ConversionPartners(bank.test, 5) == p);
}

TEST_CASE("oracle probes separate clean spectrograms") {
  Fixture& f = Shared();
  const double spk =
      EvaluateProbe(*f.oracle.speaker, SpectrogramExamples(f.bank.test, ProbeTarget::kSpeaker))
          .value();
  MESSAGE("small oracle speaker accuracy " << spk);
  CHECK(spk > 0.9);
  const ConversionMetrics clean = EvaluateClean(f.bank.test, f.oracle, 0);
  CHECK(clean.source_spk_acc == doctest::Approx(spk));
  CHECK(clean.target_spk_acc < 0.1);
}

TEST_CASE("conversion metrics") {
  Fixture& f = Shared();
  FactorizedVae<float>& model = f.trainer->model();
  const ConversionMetrics a = EvaluateConversion(model, f.bank.test, f.oracle, 1);
  const ConversionMetrics b = EvaluateConversion(model, f.bank.test, f.oracle, 1);
  CHECK(a.source_spk_acc == b.source_spk_acc);
  CHECK(a.target_spk_acc == b.target_spk_acc);
  CHECK(a.phone_acc == b.phone_acc);
  for (double v : {a.source_spk_acc, a.target_spk_acc, a.phone_acc}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // Self-conversion: X2 = X1 keeps the source speaker.
  const std::vector<int> partners = ConversionPartners(f.bank.test, 1);
  AccuracyCount src, tgt;
  for (std::size_t i = 0; i < f.bank.test.size(); ++i) {
    const MelSpectrogram& x = f.bank.test[i].normalized;
    const MelSpectrogram y = model.Convert(x, x);
    const std::vector<int> pred = f.oracle.speaker->Predict(y.values, y.frames());
    src += FrameAccuracy(pred, std::vector<int>(pred.size(), f.bank.test[i].speaker));
    tgt += FrameAccuracy(pred,
                         std::vector<int>(pred.size(), f.bank.test[partners[i]].speaker));
  }
  MESSAGE("self-conversion source " << src.value() << ", partner " << tgt.value());
  CHECK(src.value() > tgt.value());
}

TEST_CASE("extraction") {
  Fixture& f = Shared();
  FactorizedVae<float>& model = f.trainer->model();
  const SpeakerEmbedding common = SelectCommonSpeaker(model, f.bank.validation);

  std::vector<Eigen::VectorXf> all;
  Eigen::VectorXf mean = Eigen::VectorXf::Zero(common.s.size());
  for (const auto& u : f.bank.validation) {
    all.push_back(model.EncodeSpeaker(u.normalized).s);
    mean += all.back();
  }
  mean /= static_cast<float>(all.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < all.size(); ++i)
    if ((all[i] - mean).norm() < (all[best] - mean).norm()) best = i;
  CHECK(common.s == all[best]);

  const MelSpectrogram& x = f.bank.test[0].normalized;
  const Eigen::MatrixXf one = OnePassExtract(model, x);
  const Eigen::MatrixXf two = TwoPassExtract(model, x, common);
  CHECK(one.rows() == two.rows());
  CHECK(one.cols() == two.cols());
  CHECK(one.cols() == x.frames());
  const auto ex = EmbeddingExamples(model, f.bank.test, ProbeTarget::kPhone,
                                    Extraction::kTwoPass, &common);
  CHECK(ex.size() == f.bank.test.size());
  CHECK(ex[0].input == two);
  CHECK(ex[0].labels == f.bank.test[0].phones);
}

TEST_CASE("full evaluation report") {
  Fixture& f = Shared();
  EvaluationConfig ec;
  ec.probe = SmallProbe();
  ec.probe.steps = 200;
  ec.seed = 3;
  const EvaluationReport r = Evaluate(f.trainer->model(), f.bank, f.oracle, ec);
  r.Validate();
  CHECK(r.seed == 3u);
  CHECK(r.probe_phone_acc_one_pass > 0.0);
  CHECK(r.probe_spk_acc_two_pass > 0.0);
}

}  // namespace
}  // namespace fvae
