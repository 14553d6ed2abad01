#pragma once

#include "iaf/forward/kernels.hpp"
#include "iaf/mining.hpp"
#include "iaf/point_cloud.hpp"

namespace iaf::net {

struct PipelineConfig {
    int levels = 5;
    int k1 = 16;
    int k2 = 32;
    int k_eigen = 16;  // neighborhood for the eigenvalue-tuple input features
    MiningConfig mining;
    NonlocalMode mode = NonlocalMode::attention;
    bool residual = true;
    bool standardize = false;  // per-feature standardization after each block
    int class_count = 0;       // 0: take it from the cloud labels
};

// Per-layer tensors of one forward pass.
struct FeatureMap {
    std::vector<RowMatXf> x;  // encoder outputs, levels 1..L
    std::vector<RowMatXf> y;  // decoder outputs, levels 1..L (y[L-1] == x[L-1])
    std::vector<RowMatXd> z;  // per-level class probabilities
};

struct PipelineResult {
    std::vector<LayerSpec> specs;
    std::vector<std::vector<int>> level_indices;  // into the input cloud
    FeatureMap features;
    RowMatXd final_probs;  // N x C
    bool has_losses = false;
    std::array<double, 5> stage_losses{};  // L_ms per level (unused levels stay 0)
    double prediction_loss = 0.0;
    double total_loss = 0.0;
};

// Deterministic seeded forward pass over the full hierarchy: eigen-tuple
// inputs, dual-receptive-field encoder, interpolation + focalization
// decoder, and the prediction head. Bit-identical for a fixed seed.
PipelineResult forward_pipeline(const PointCloud& cloud, const std::vector<LayerSpec>& specs,
                                std::uint64_t seed, const PipelineConfig& config = {});

}  // namespace iaf::net
