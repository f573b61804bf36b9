// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ankf/comp/attennc.hpp"
#include "ankf/comp/dataset.hpp"

namespace ankf::comp {

struct TrainingConfig {
    double lambda1 = 1.0;  // latent distillation weight
    double lambda2 = 1.0;  // state loss weight
    double w_rot = 1.0, w_vel = 1.0, w_pos = 1.0;
    double lr = 1e-3;
    double dec_lr_scale = 0.1;  // fine-tune rate for the reused decoder
    int stage1_epochs = 10;
    int stage2_epochs = 20;
    int batch = 64;
    uint64_t seed = 0;
    bool parallel = true;  // OpenMP over window blocks; off = serial reference
};

struct CurveRow {
    int epoch = 0;  // 0 = evaluation at initialization
    double l_latent = 0.0;
    double l_state = 0.0;
    double l_total = 0.0;
};

struct Stage1Result {
    Autoencoders models;
    // Reconstruction-MSE curves per autoencoder (epoch 0 = at init).
    std::vector<CurveRow> curve_slip, curve_inekf, curve_err;
};

struct Stage2Result {
    AttenNc model;
    TeacherEncoder teacher;
    std::vector<CurveRow> curve;
};

// Step 1: sequence autoencoders trained with reconstruction MSE.
Stage1Result train_stage1(const Dataset& data, const TrainingConfig& config);

// Step 2: attention training in the latent space with the frozen stage-1
// encoders and the error encoder as teacher; the error decoder is fine-tuned
// into the compensation decoder. End-to-end trains everything jointly.
Stage2Result train_stage2(const Dataset& data, const Stage1Result& stage1,
                          const TrainingConfig& config, Variant variant);

}  // namespace ankf::comp
