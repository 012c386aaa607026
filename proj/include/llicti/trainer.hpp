// Copyright (c) the LLICTI project authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//

#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "llicti/interpolator.hpp"
#include "llicti/plane.hpp"

namespace llicti {

struct TrainConfig {
  int batch_size = 64;
  int patch_size = 64;
  double lr_init = 1e-4;
  double lr_floor = 1e-5;
  double lr_decay = 0.5;
  int patience = 5;            // evals without improvement before decaying
  double plateau_eps = 1e-3;   // relative improvement that counts as progress
  int max_steps = 5000;
  int eval_interval = 250;
  uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

struct Corpus {
  std::vector<Plane> train;  // 8-bit RGB
  std::vector<Plane> val;
};

struct TrainLogEntry {
  int step = 0;
  double lr = 0.0;
  double train_bpp = 0.0;
  double val_bpp = 0.0;
};

struct TrainResult {
  ICNNWeights weights;
  std::vector<TrainLogEntry> log;
};

// Validation-plateau learning-rate schedule: decay when `patience`
// consecutive observations fail to improve on the best by more than
// plateau_eps (relative).
class PlateauScheduler {
 public:
  PlateauScheduler(double lr_init, double decay, double floor, int patience, double eps)
      : lr_(lr_init), decay_(decay), floor_(floor), patience_(patience), eps_(eps) {}

  double lr() const { return lr_; }
  void observe(double val_metric);

 private:
  double lr_, decay_, floor_;
  int patience_;
  double eps_;
  double best_ = 1e300;
  int stall_ = 0;
};

// Double-precision mirror of ICNNWeights with all scalars in one flat vector
// (serialization order), which is what the optimizer and the
// finite-difference checks work on.
class TrainingNet {
 public:
  explicit TrainingNet(const ICNNWeights& w);
  ICNNWeights to_weights() const;

  const ICNNConfig& config() const { return cfg_; }
  size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  struct Layer {
    ConvSpec spec;
    size_t w_off = 0, b_off = 0;
  };
  struct Head {
    std::vector<Layer> branches;
    std::vector<Layer> hidden;
    Layer final_layer;
  };

  const Head& head(int set, InterpId id, HeadId h) const {
    return sets_[set][static_cast<int>(id)][static_cast<int>(h)];
  }
  int set_for_scale(int scale) const { return cfg_.share_across_scales ? 0 : scale - 1; }

 private:
  ICNNConfig cfg_;
  std::vector<double> params_;
  std::vector<std::array<std::array<Head, kNumHeads>, 3>> sets_;

  friend class PatchGraph;
};

// Records one patch's forward pass so gradients can be accumulated later.
// Thread-safe across instances sharing one TrainingNet.
class PatchGraph {
 public:
  explicit PatchGraph(const TrainingNet& net) : net_(&net) {}

  // Total code length in bits of all interpolated subbands of the patch
  // (coarsest excluded), per the factorized mixture model.
  double forward(const Plane& ycc_patch);

  // Accumulates d(bits)/d(params) of the last forward into `grad`
  // (size param_count, caller-initialized). Throws StateError when no
  // forward pass has been recorded.
  void backward(std::vector<double>& grad);

 private:
  struct HeadTape;
  struct SubbandTape;

  const TrainingNet* net_;
  std::vector<SubbandTape> tapes_;
  bool recorded_ = false;
};

// Mean over patches of per-pixel code length (bits per pixel, all three
// channels included; the fixed-length coarsest share is excluded).
double loss_bpp(std::span<const Plane> ycc_patches, const ICNNWeights& weights);

// Uniform-model reference: bits/pixel of coding every interpolated sample
// with a flat PMF over its support, normalized per original pixel.
double flat_model_bpp(int height, int width, int scales);
// Raw 8-bit RGB equivalent (the stricter baseline the codec must beat).
inline constexpr double kRawRgbBpp = 24.0;

struct EvalReport {
  std::vector<double> scale_bpp;  // index 0 = scale 1, averaged over images
  double fixed_bpp = 0.0;
  double total_bpp = 0.0;
  double bpsp() const { return total_bpp / 3.0; }
};

EvalReport evaluate(std::span<const Plane> images, const ICNNWeights& weights, int threads = 1);

TrainResult train(const Corpus& corpus, const ICNNConfig& model_cfg, const TrainConfig& cfg,
                  const std::string& checkpoint_path = "", const std::string& log_csv_path = "");

}  // namespace llicti
