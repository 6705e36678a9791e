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

// Acceptance runner: one PASS/FAIL line per criterion. Criteria 1-6 and 8
// take seconds to minutes; criterion 7 trains twelve toy models.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fvae/evaluation.hpp"
#include "fvae/features.hpp"
#include "fvae/model.hpp"
#include "fvae/nn/optim.hpp"
#include "fvae/objectives.hpp"
#include "fvae/trainer.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace fvae {
namespace {

using nn::Seq;
using testing::NumericGradient;
using testing::RandomMatrix;
using testing::RandomSeq;
using testing::RelativeError;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------------------
// Shared toy corpus (8 speakers x 10 phones).

const FeatureBank& ToyBank() {
  static const FeatureBank bank = [] {
    const ToyCorpusConfig tc;
    const FeatureConfig fc;
    return ToyFeatureBank(GenerateToyCorpus(tc, fc, 1), fc, 1, true);
  }();
  return bank;
}

// ---------------------------------------------------------------------------
// 1. VTLP formula.

// Independent piecewise-linear warp: slope alpha below the breakpoint, then
// the straight line through (breakpoint, alpha * breakpoint) and (fmax, fmax).
double WarpOracle(double f, double alpha, double f_hi, double fmax) {
  const double bp = f_hi * std::min(alpha, 1.0) / alpha;
  if (f <= bp) return alpha * f;
  const double y0 = alpha * bp;
  return y0 + (fmax - y0) * (f - bp) / (fmax - bp);
}

void Criterion1(Outcome& o) {
  const double fmax = 8000.0;
  Rng rng(101);
  long identity_bad = 0, endpoint_bad = 0, monotone_bad = 0;
  double continuity = 0.0, oracle = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const VtlpParams p = SampleVtlpParams(rng);
    const double f_hi = p.f_hi_frac * fmax;
    for (int k = 0; k <= 50; ++k) {
      const double f = fmax * UniformReal(rng, 0.0, 1.0);
      if (VtlpWarpFrequency(f, 1.0, f_hi, fmax) != f) ++identity_bad;
      oracle = std::max(oracle, std::abs(VtlpWarpFrequency(f, p.alpha, f_hi, fmax) -
                                         WarpOracle(f, p.alpha, f_hi, fmax)));
    }
    if (VtlpWarpFrequency(fmax, p.alpha, f_hi, fmax) != fmax) ++endpoint_bad;
    const double bp = f_hi * std::min(p.alpha, 1.0) / p.alpha;
    const double at = VtlpWarpFrequency(bp, p.alpha, f_hi, fmax);
    const double above = VtlpWarpFrequency(std::nextafter(bp, fmax), p.alpha, f_hi, fmax);
    continuity = std::max({continuity, std::abs(above - at), std::abs(at - p.alpha * bp)});
    double prev = VtlpWarpFrequency(0.0, p.alpha, f_hi, fmax);
    for (int k = 1; k <= 800; ++k) {
      const double cur = VtlpWarpFrequency(fmax * k / 800.0, p.alpha, f_hi, fmax);
      if (!(cur > prev)) ++monotone_bad;
      prev = cur;
    }
  }
  o.detail << "identity mismatches " << identity_bad << ", endpoint mismatches " << endpoint_bad
           << ", max breakpoint jump " << continuity << ", monotonicity violations "
           << monotone_bad << ", max deviation from oracle " << oracle;
  o.Require(identity_bad == 0, "identity at alpha=1");
  o.Require(endpoint_bad == 0, "endpoint");
  o.Require(continuity < 1e-9, "continuity < 1e-9");
  o.Require(monotone_bad == 0, "monotonicity");
  o.Require(oracle < 1e-9, "oracle agreement");
}

// ---------------------------------------------------------------------------
// 2. KL closed form vs. quadrature.

double KlQuadrature(double mu, double sigma) {
  const double lo = mu - 12.0 * sigma, hi = mu + 12.0 * sigma;
  const int n = 20000;
  const double h = (hi - lo) / n;
  auto f = [&](double z) {
    const double lq = -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma) -
                      0.5 * (z - mu) * (z - mu) / (sigma * sigma);
    const double lp = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
    return std::exp(lq) * (lq - lp);
  };
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

void Criterion2(Outcome& o) {
  Rng rng(102);
  Seq<double> mu(1, 1, 1), lv(1, 1, 1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double m = UniformReal(rng, -3.0, 3.0);
    const double sigma = std::exp(UniformReal(rng, std::log(0.1), std::log(4.0)));
    mu.data(0, 0) = m;
    lv.data(0, 0) = 2.0 * std::log(sigma);
    worst = std::max(worst, std::abs(KlLoss(mu, lv).value - KlQuadrature(m, sigma)));
  }
  o.detail << "max |closed form - quadrature| " << worst << " over 100 draws";
  o.Require(worst < 1e-4, "|delta| < 1e-4");
}

// ---------------------------------------------------------------------------
// 3. CPC loss.

void Criterion3(Outcome& o) {
  Rng rng(103);
  double uniform_err = 0.0;
  for (int B : {2, 4, 8}) {
    for (int n : {1, 5, 40}) {
      const int T = 60;
      const Eigen::VectorXd v = RandomMatrix(16, 1, rng, 0.3);
      Seq<double> h(16, B, T);
      for (int b = 0; b < B; ++b)
        for (int t = 0; t < T; ++t) h.item(b).col(t) = v * std::cos(0.1 * t);
      const double expect = (T - n + 1) * std::log(static_cast<double>(B));
      uniform_err = std::max(uniform_err, std::abs(CpcLoss(h, n).value - expect) / expect);
    }
  }

  // B=2, n=1, T'=2; item 0 = [[1, .5], [0, .2]], item 1 = [[0, -.3], [1, .8]].
  Seq<double> h(2, 2, 2);
  h.item(0) << 1.0, 0.5, 0.0, 0.2;
  h.item(1) << 0.0, -0.3, 1.0, 0.8;
  const double ce0 = std::log(std::exp(0.5) + std::exp(-0.3)) - 0.5;
  const double ce1 = std::log(std::exp(0.2) + std::exp(0.8)) - 0.8;
  const double hand = (ce0 + ce1) / 2.0 + std::log(2.0);
  const double hand_err = std::abs(CpcLoss(h, 1).value - hand);

  const Seq<double> r = RandomSeq(32, 8, 50, rng);
  const double base = CpcLoss(r, 10).value;
  double rot_err = 0.0;
  for (int i = 0; i < 10; ++i) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(RandomMatrix(32, 32, rng));
    const Eigen::MatrixXd q = qr.householderQ();
    rot_err = std::max(rot_err, std::abs(CpcLoss(Seq<double>(q * r.data, 8, 50), 10).value - base));
  }
  o.detail << "uniform case relative error " << uniform_err << ", hand case error " << hand_err
           << ", rotation error " << rot_err;
  o.Require(uniform_err < 1e-12, "uniform case exact");
  o.Require(hand_err < 1e-9, "hand case < 1e-9");
  o.Require(rot_err < 1e-6, "rotation invariance < 1e-6");
}

// ---------------------------------------------------------------------------
// 4. Gradient checks.

double EndToEndGradientError(int downsample, double beta, std::string* worst) {
  ModelConfig c;
  c.n_mels = 8;
  c.hidden = 16;
  c.content_dim = 4;
  c.speaker_dim = 8;
  c.downsample = downsample;
  c.beta = beta;
  Rng rng(104);
  FactorizedVae<double> model(c, rng);
  const int B = 2, T = 20;
  const Seq<double> x1 = RandomSeq(8, B, T, rng);
  Seq<double> content(8, B, T);
  for (int b = 0; b < B; ++b) {
    MelSpectrogram m;
    m.values = x1.item(b).cast<float>();
    content.item(b) = InstanceNormalize(m).values.cast<double>();
  }
  auto run = [&](bool backward) {
    Rng noise(77);
    Eigen::MatrixXd eps;
    const Posterior<double> p = model.EncodeContent(content);
    const Seq<double> z = FactorizedVae<double>::Reparameterize(p, ForwardMode::kTrain, noise, &eps);
    const Seq<double> s = model.EncodeSpeaker(x1);
    const Seq<double> xhat = model.Decode(z, s, T);
    const LossGrad<double> rec = ReconstructionLoss(xhat, x1);
    const KlGrad<double> kl = KlLoss(p.mu, p.log_var);
    if (backward) {
      auto [dz, ds] = model.BackwardDecode(Seq<double>(rec.grad, B, T));
      model.BackwardSpeaker(ds);
      Seq<double> d_mu(kl.d_mu * beta, B, p.mu.frames);
      Seq<double> d_lv(kl.d_log_var * beta, B, p.mu.frames);
      FactorizedVae<double>::ReparameterizeBackward(p, eps, dz, d_mu, d_lv);
      model.BackwardContent(d_mu, d_lv);
    }
    return rec.value + beta * kl.value;
  };
  const testing::GradCheck g = testing::CheckParamGradients(model.Parameters(), run);
  *worst = g.worst;
  return g.max_error;
}

void Criterion4(Outcome& o) {
  Rng rng(105);
  std::map<std::string, double> err;

  Seq<double> xhat = RandomSeq(6, 2, 7, rng);
  const Seq<double> x = RandomSeq(6, 2, 7, rng);
  err["reconstruction"] = RelativeError(ReconstructionLoss(xhat, x).grad, NumericGradient(xhat.data, [&] {
                                          return ReconstructionLoss(xhat, x).value;
                                        }));

  Seq<double> mu = RandomSeq(3, 2, 5, rng), lv = RandomSeq(3, 2, 5, rng);
  const KlGrad<double> k = KlLoss(mu, lv);
  auto kl = [&] { return KlLoss(mu, lv).value; };
  err["kl/mu"] = RelativeError(k.d_mu, NumericGradient(mu.data, kl));
  err["kl/log_var"] = RelativeError(k.d_log_var, NumericGradient(lv.data, kl));

  Seq<double> logits = RandomSeq(5, 3, 6, rng);
  const std::vector<int> spk{0, 4, 2};
  err["speaker classifier"] =
      RelativeError(SpeakerClassifierLoss(logits, spk).grad, NumericGradient(logits.data, [&] {
                      return SpeakerClassifierLoss(logits, spk).value;
                    }));

  Seq<double> h = RandomSeq(6, 4, 12, rng);
  err["cpc"] = RelativeError(CpcLoss(h, 3).grad,
                             NumericGradient(h.data, [&] { return CpcLoss(h, 3).value; }));

  std::string worst1, worst3;
  err["model S_ds=1"] = EndToEndGradientError(1, 1e-3, &worst1);
  err["model S_ds=3"] = EndToEndGradientError(3, 1.0, &worst3);

  double max_err = 0.0;
  for (const auto& [name, e] : err) {
    o.detail << name << " " << e << ", ";
    max_err = std::max(max_err, e);
  }
  o.detail << "worst model tensors " << worst1 << " / " << worst3;
  o.Require(max_err < 1e-3, "relative error < 1e-3");
}

// ---------------------------------------------------------------------------
// 5. Shapes, schedule, clipping.

void Criterion5(Outcome& o) {
  long shape_bad = 0, cases = 0;
  Rng rng(106);
  for (int S : {1, 32}) {
    ModelConfig c;
    c.hidden = 16;
    c.n_resblocks = 1;
    c.speaker_dim = 16;
    c.downsample = S;
    FactorizedVae<float> model(c, rng);
    model.SetTraining(false);
    for (int T = 50; T <= 600; ++T) {
      MelSpectrogram x;
      x.values = RandomMatrix(80, T, rng).cast<float>();
      x.norm_state = NormState::kGlobal;
      const ContentPosterior p = model.EncodeContent(InstanceNormalize(x));
      const int expect = (T + S - 1) / S;
      const bool clamp_ok = p.log_var.minCoeff() >= -14.0f && p.log_var.maxCoeff() <= 14.0f;
      const SpeakerEmbedding s = model.EncodeSpeaker(x);
      const MelSpectrogram y = model.Decode(p.mu, s, T);
      ++cases;
      if (p.mu.rows() != 32 || p.mu.cols() != expect || p.log_var.cols() != expect ||
          !clamp_ok || s.s.size() != 16 || y.bands() != 80 || y.frames() != T)
        ++shape_bad;
    }
  }

  UpdateSchedule sched(true, 3);
  bool pattern_ok = true;
  for (int i = 0; i < 1000; ++i) {
    const UpdateKind kind = sched.Next();
    pattern_ok &= (kind == UpdateKind::kJoint) == (i % 4 == 3);
  }

  std::vector<nn::Param<double>> params(2);
  params[0].value = Eigen::MatrixXd::Zero(1, 2);
  params[0].grad.resize(1, 2);
  params[0].grad << 60.0, 0.0;
  params[1].value = Eigen::MatrixXd::Zero(1, 1);
  params[1].grad = Eigen::MatrixXd::Constant(1, 1, 80.0);
  const double pre = nn::ClipGradNorm<double>({&params[0], &params[1]}, 10.0);
  const double clipped0 = params[0].grad(0, 0), clipped1 = params[1].grad(0, 0);
  const bool clip_ok = pre == 100.0 && params[0].grad(0, 0) == 6.0 &&
                       params[0].grad(0, 1) == 0.0 && params[1].grad(0, 0) == 8.0;
  params[1].grad(0, 0) = 3.0;
  params[0].grad << 4.0, 0.0;
  const double small = nn::ClipGradNorm<double>({&params[0], &params[1]}, 10.0);
  const bool untouched = small == 5.0 && params[0].grad(0, 0) == 4.0 && params[1].grad(0, 0) == 3.0;

  o.detail << cases << " shape cases with " << shape_bad << " violations; schedule "
           << sched.adversary_steps() << " adversary / " << sched.joint_steps()
           << " joint; clip (60, 0, 80) pre-norm " << pre << " -> (" << clipped0 << ", 0, "
           << clipped1 << ")";
  o.Require(shape_bad == 0, "shape contracts");
  o.Require(sched.adversary_steps() == 750 && sched.joint_steps() == 250 && pattern_ok,
            "3:1 schedule");
  o.Require(clip_ok && untouched, "clipping arithmetic");
}

// ---------------------------------------------------------------------------
// 6 and 8. Training smoke run and determinism.

TrainConfig TinyConfig(TrainMode mode) {
  TrainConfig c = PresetFor(mode);
  c.model.hidden = 16;
  c.model.n_resblocks = 1;
  c.adversary.hidden = 16;
  c.adversary.n_resblocks = 1;
  c.adversary.cpc_steps = 40;
  c.batch = 8;
  c.min_seconds = c.max_seconds = 1.0;
  c.paired_min_seconds = c.paired_max_seconds = 2.0;
  c.validate_every = 100;
  c.max_validation_utterances = 8;
  return c;
}

void Criterion6(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainConfig c = TinyConfig(TrainMode::kPlain);
  c.steps = 200;
  Trainer tr(c, ToyBank());
  const TrainResult r = tr.Train("");
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 10; ++i) {
    head += r.history[i].loss.l_rec / 10.0;
    tail += r.history[r.history.size() - 10 + i].loss.l_rec / 10.0;
  }
  const double secs = Seconds(t0);
  o.detail << "mean L_rec steps 1-10 " << head << ", steps 191-200 " << tail << ", ratio "
           << tail / head << ", training " << secs << " s";
  o.Require(r.history.size() == 200u, "200 steps");
  o.Require(tail <= 0.5 * head, "L_rec <= 0.5 x initial");
  o.Require(secs < 300.0, "runtime < 5 min");
}

std::vector<double> LossTrace(TrainMode mode, long steps) {
  TrainConfig c = TinyConfig(mode);
  c.steps = steps;
  c.seed = 42;
  Trainer tr(c, ToyBank());
  std::vector<double> out;
  while (tr.step() < steps) {
    const StepStats s = tr.Step();
    if (s.kind != UpdateKind::kAdversary) out.push_back(s.loss.l_total);
  }
  return out;
}

void Criterion8(Outcome& o) {
  for (TrainMode mode : {TrainMode::kPlain, TrainMode::kAdversarialCpc}) {
    const std::vector<double> a = LossTrace(mode, 50), b = LossTrace(mode, 50);
    const bool same = a.size() == 50u && b.size() == 50u &&
                      std::memcmp(&a.back(), &b.back(), sizeof(double)) == 0 && a == b;
    o.detail << TrainModeName(mode) << " step-50 loss " << std::setprecision(17) << a.back()
             << (same ? " (identical) " : " (differs) ");
    o.Require(same, std::string("bit-identical ") + TrainModeName(mode));
  }
}

// ---------------------------------------------------------------------------
// 7. Toy-scale disentanglement.

struct Run7 {
  std::string name;
  TrainMode mode;
  bool paired;
  double lambda;  // unused for the non-adversarial modes
};

// Both adversaries at lambda = 1; adv_cpc with X2 != X1.
const std::vector<Run7> kRuns7 = {{"plain", TrainMode::kPlain, false, 0.0},
                                  {"bottleneck", TrainMode::kBottleneck, false, 0.0},
                                  {"adv_clf", TrainMode::kAdversarialClassifier, true, 1.0},
                                  {"adv_cpc", TrainMode::kAdversarialCpc, true, 1.0}};

ProbeConfig Probe7() {
  ProbeConfig pc;
  pc.hidden = 32;
  pc.n_resblocks = 1;
  pc.steps = 1500;
  pc.batch = 16;
  pc.validate_every = 200;
  pc.patience = 3;
  return pc;
}

TrainConfig Config7(const Run7& run, std::uint64_t seed) {
  TrainConfig c = PresetFor(run.mode);
  c.steps = 5000;
  c.seed = seed;
  c.paired = run.paired;
  if (c.has_adversary()) c.lambda = run.lambda;
  c.model.hidden = 32;
  c.model.n_resblocks = 1;
  c.adversary.hidden = 32;
  c.adversary.n_resblocks = 1;
  c.adversary.cpc_steps = 40;
  c.batch = 16;
  c.min_seconds = c.max_seconds = 1.0;
  c.paired_min_seconds = c.paired_max_seconds = 2.0;
  c.validate_every = 500;
  c.max_validation_utterances = 24;
  ApplyModeConstraints(c);
  return c;
}

void Criterion7(Outcome& o, const std::string& work_dir) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  const FeatureBank& bank = ToyBank();
  OracleProbes oracle = TrainOracleProbes(bank, Probe7());
  const ConversionMetrics clean = EvaluateClean(bank.test, oracle, 0);
  std::cout << "  oracle probes ready after " << Seconds(t0) << " s; clean source "
            << clean.source_spk_acc << ", phone " << clean.phone_acc << std::endl;

  std::map<std::pair<std::string, int>, EvaluationReport> reports;
  double seed0_pair_secs = Seconds(t0);
  for (int seed = 0; seed < 3; ++seed) {
    for (const Run7& run : kRuns7) {
      const auto t_run = std::chrono::steady_clock::now();
      const TrainConfig cfg = Config7(run, seed);
      std::string dir;
      if (!work_dir.empty()) {
        dir = (fs::path(work_dir) / (run.name + "_seed" + std::to_string(seed))).string();
        fs::create_directories(dir);
      }
      Trainer tr(cfg, bank);
      tr.Train(dir);
      EvaluationConfig ec;
      ec.probe = Probe7();
      ec.seed = seed;
      EvaluationReport r = Evaluate(tr.model(), bank, oracle, ec);
      r.mode = run.name;
      r.seed = seed;
      if (!dir.empty()) WriteReport(dir + "/report.json", r);
      reports[{run.name, seed}] = r;
      const double secs = Seconds(t_run);
      if (seed == 0 && (run.name == "plain" || run.name == "adv_cpc")) seed0_pair_secs += secs;
      std::cout << "  " << run.name << " seed " << seed << ": " << r.ToCsv().substr(r.ToCsv().find('\n') + 1)
                << " (" << secs << " s)" << std::endl;
    }
  }

  const EvaluationReport& plain0 = reports[{"plain", 0}];
  const EvaluationReport& cpc0 = reports[{"adv_cpc", 0}];
  const bool a1 = cpc0.probe_spk_acc_one_pass <= 0.65 * plain0.probe_spk_acc_one_pass;
  const bool a2 = cpc0.probe_spk_acc_two_pass <= cpc0.probe_spk_acc_one_pass;
  const bool b1 = cpc0.target_spk_acc >= 0.60;
  const bool b2 = cpc0.source_spk_acc <= 0.10;
  const bool b3 = cpc0.phone_acc >= 0.9 * cpc0.clean_phone_acc;

  int bn_wins = 0, clf_wins = 0, cpc_phone_wins = 0;
  for (int seed = 0; seed < 3; ++seed) {
    const double plain_spk = reports[{"plain", seed}].probe_spk_acc_one_pass;
    bn_wins += reports[{"bottleneck", seed}].probe_spk_acc_one_pass < plain_spk;
    clf_wins += reports[{"adv_clf", seed}].probe_spk_acc_one_pass < plain_spk;
    cpc_phone_wins += reports[{"adv_cpc", seed}].phone_acc >= reports[{"adv_clf", seed}].phone_acc;
  }

  o.detail << "(a) one-pass speaker probe adv_cpc " << cpc0.probe_spk_acc_one_pass << " vs 0.65 x plain "
           << 0.65 * plain0.probe_spk_acc_one_pass << ", two-pass " << cpc0.probe_spk_acc_two_pass
           << ", seed-0 runtime " << seed0_pair_secs / 60.0 << " min; (b) target "
           << cpc0.target_spk_acc << ", source " << cpc0.source_spk_acc << ", phone "
           << cpc0.phone_acc << " vs 0.9 x clean " << 0.9 * cpc0.clean_phone_acc
           << "; (c) bottleneck < plain on " << bn_wins << "/3, adv_clf < plain on " << clf_wins
           << "/3, adv_cpc phone >= adv_clf on " << cpc_phone_wins << "/3";
  o.Require(a1, "7a speaker ratio");
  o.Require(a2, "7a two-pass <= one-pass");
  o.Require(seed0_pair_secs < 45.0 * 60.0, "7a runtime");
  o.Require(b1, "7b target >= 0.60");
  o.Require(b2, "7b source <= 0.10");
  o.Require(b3, "7b phone >= 0.9 x clean");
  o.Require(bn_wins >= 2, "7c bottleneck beats plain");
  o.Require(clf_wins >= 2, "7c adv_clf beats plain");
  o.Require(cpc_phone_wins >= 2, "7c adv_cpc phone >= adv_clf");
}

}  // namespace
}  // namespace fvae

int main(int argc, char** argv) {
  using namespace fvae;
  CLI::App app{"fvae acceptance criteria"};
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8};
  std::string work_dir;
  app.add_option("--criteria", criteria, "Criteria to run")->delimiter(',')->check(CLI::Range(1, 8));
  app.add_option("--work-dir", work_dir, "Directory for criterion 7 models and reports");
  CLI11_PARSE(app, argc, argv);
  std::sort(criteria.begin(), criteria.end());
  criteria.erase(std::unique(criteria.begin(), criteria.end()), criteria.end());

  // Runtime limits in seconds; criterion 7 checks its own.
  const std::map<int, double> limit = {{1, 1.0}, {2, 5.0}, {3, 5.0}, {4, 120.0},
                                       {5, 60.0}, {6, 300.0}, {7, 1e9}, {8, 120.0}};
  const std::map<int, std::function<void(Outcome&)>> run = {
      {1, Criterion1}, {2, Criterion2}, {3, Criterion3}, {4, Criterion4},
      {5, Criterion5}, {6, Criterion6}, {7, [&](Outcome& o) { Criterion7(o, work_dir); }},
      {8, Criterion8}};

  if (std::any_of(criteria.begin(), criteria.end(), [](int c) { return c >= 6; })) {
    const auto t0 = std::chrono::steady_clock::now();
    const FeatureBank& bank = ToyBank();
    std::cout << "toy corpus: " << bank.train.size() << " train utterances, featurized in "
              << Seconds(t0) << " s" << std::endl;
  }

  int failed = 0;
  for (int id : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run.at(id)(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = Seconds(t0);
    if (secs >= limit.at(id)) o.Require(false, "runtime limit " + std::to_string(limit.at(id)) + " s");
    failed += !o.pass;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << std::fixed
              << std::setprecision(2) << secs << " s) " << std::defaultfloat
              << std::setprecision(6) << o.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
