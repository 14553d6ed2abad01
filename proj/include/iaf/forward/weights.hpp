#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iaf/common.hpp"

namespace iaf::net {

// Row-vector affine map: out = x * w + b, with w sized in x out.
struct Affine {
    RowMatXf w;
    Eigen::RowVectorXf b;

    RowMatXf apply(const Eigen::Ref<const RowMatXf>& x) const;
    int in() const { return static_cast<int>(w.rows()); }
    int out() const { return static_cast<int>(w.cols()); }
};

RowMatXf leaky_relu(RowMatXf x, float slope = 0.01f);

struct LayerSpec {
    int level = 1;        // 1..5
    int n_points = 0;     // N_l; N_1 = N, then floor(N_{l-1} / 4)
    int feat_width = 64;  // D_l, encoder
    int decoder_width = 64;
    int k1 = 16;
    int k2 = 32;
};

// Default hierarchy: widths 64/128/256/512/1024 and a 4x point reduction per
// level. Throws ConfigError naming the first level emptied by subsampling.
std::vector<LayerSpec> make_layer_specs(int n, int levels = 5, int k1 = 16, int k2 = 32);

enum class NonlocalMode { literal, attention };
NonlocalMode parse_nonlocal_mode(const std::string& text);
std::string to_string(NonlocalMode mode);

struct EncoderWeights {
    Affine g1_a, g1_b;  // two-stage local aggregation map
    Affine g2_score;    // attentive pooling scores
};

struct DecoderWeights {
    Affine g_psi;     // feature propagation: (D'_l + D_{l-1}) -> D'_{l-1}
    Affine g1_focal;  // (D'_{l-1} + C) -> D_{l-1}
    Affine g2_out;    // D'_{l-1} -> D'_{l-1}
    Affine g3_key;    // focal embedding
    Affine g4_query;  // decoder-row embedding
    Affine g5_value;
    Affine g6_head;   // D'_{l-1} -> C, per-level class logits
};

// All parameters of the forward reference, regenerated bit-identically from
// (seed, mode). Matrices are drawn in declaration order from one generator.
struct WeightBundle {
    std::uint64_t seed = 0;
    NonlocalMode mode = NonlocalMode::attention;
    std::vector<EncoderWeights> enc;  // levels 1..5
    std::vector<DecoderWeights> dec;  // fine levels 1..4
    Affine g6_top;                    // logits head for the deepest level
    Affine head_fc1, head_fc2, head_fc3;  // final prediction head
};

// pos_width is 3 plus the number of extra point properties (e.g. 6 with rgb).
WeightBundle make_weights(const std::vector<LayerSpec>& specs, int class_count, int pos_width,
                          std::uint64_t seed, NonlocalMode mode);

}  // namespace iaf::net
