#include "iaf/forward/weights.hpp"

#include <cmath>
#include <random>

namespace iaf::net {

RowMatXf Affine::apply(const Eigen::Ref<const RowMatXf>& x) const {
    if (x.cols() != w.rows()) {
        throw ConfigError("affine: input width " + std::to_string(x.cols()) +
                          " does not match weight rows " + std::to_string(w.rows()));
    }
    // Row-at-a-time on purpose: a batched product may round a row differently
    // depending on its position in the batch, which would break the
    // permutation-equivariance and thread-count guarantees.
    RowMatXf out(x.rows(), w.cols());
#pragma omp parallel for schedule(static) if (x.rows() > 256)
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out.row(i).noalias() = x.row(i) * w;
        out.row(i) += b;
    }
    return out;
}

RowMatXf leaky_relu(RowMatXf x, float slope) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        float* v = x.data() + i;
        if (*v < 0.0f) *v *= slope;
    }
    return x;
}

std::vector<LayerSpec> make_layer_specs(int n, int levels, int k1, int k2) {
    if (n < 1) throw ParameterError("make_layer_specs: empty cloud");
    if (levels < 1) throw ParameterError("make_layer_specs: need at least one level");
    if (k1 < 1 || k2 < 1) throw ParameterError("make_layer_specs: neighborhood sizes must be >= 1");

    static constexpr int kWidths[] = {64, 128, 256, 512, 1024};
    std::vector<LayerSpec> specs;
    int count = n;
    for (int l = 1; l <= levels; ++l) {
        if (l > 1) count /= 4;
        if (count < 1) {
            throw ConfigError("layer " + std::to_string(l) +
                              " would be empty after subsampling (start N=" + std::to_string(n) + ")");
        }
        const int width = kWidths[std::min(l - 1, 4)];
        specs.push_back(LayerSpec{l, count, width, width, k1, k2});
    }
    return specs;
}

NonlocalMode parse_nonlocal_mode(const std::string& text) {
    if (text == "literal") return NonlocalMode::literal;
    if (text == "attention") return NonlocalMode::attention;
    throw ParameterError("unknown nonlocal mode '" + text + "' (expected literal|attention)");
}

std::string to_string(NonlocalMode mode) {
    return mode == NonlocalMode::literal ? "literal" : "attention";
}

namespace {

// Deterministic across platforms: mt19937_64 is fully specified and the
// uniform is derived from its raw output, not from std::distributions.
class WeightRng {
public:
    explicit WeightRng(std::uint64_t seed) : rng_(seed) {}

    Affine affine(int in, int out) {
        const float bound = 1.0f / std::sqrt(static_cast<float>(in));
        Affine a;
        a.w.resize(in, out);
        for (int r = 0; r < in; ++r) {
            for (int c = 0; c < out; ++c) {
                a.w(r, c) = symmetric_uniform(bound);
            }
        }
        a.b.resize(out);
        for (int c = 0; c < out; ++c) {
            a.b(c) = symmetric_uniform(bound);
        }
        return a;
    }

private:
    float symmetric_uniform(float bound) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
        return static_cast<float>((2.0 * u - 1.0) * static_cast<double>(bound));
    }

    std::mt19937_64 rng_;
};

}  // namespace

WeightBundle make_weights(const std::vector<LayerSpec>& specs, int class_count, int pos_width,
                          std::uint64_t seed, NonlocalMode mode) {
    if (specs.empty()) throw ParameterError("make_weights: no layer specs");
    if (class_count < 1) throw ParameterError("make_weights: class_count must be >= 1");
    if (pos_width < 3) throw ParameterError("make_weights: pos_width must be >= 3");

    WeightBundle bundle;
    bundle.seed = seed;
    bundle.mode = mode;
    WeightRng rng(seed);

    const int levels = static_cast<int>(specs.size());
    constexpr int kTupleWidth = 3;  // eigenvalue-tuple inputs at level 1

    for (int l = 1; l <= levels; ++l) {
        const int d_prev = l == 1 ? kTupleWidth : specs[static_cast<size_t>(l - 2)].feat_width;
        const int d_out = specs[static_cast<size_t>(l - 1)].feat_width;
        const int concat = 2 * pos_width + 2 * d_prev;
        EncoderWeights enc;
        enc.g1_a = rng.affine(concat, d_out);
        enc.g1_b = rng.affine(d_out, d_out);
        enc.g2_score = rng.affine(d_out, d_out);
        bundle.enc.push_back(std::move(enc));
    }

    for (int f = 1; f < levels; ++f) {  // fine level of each decoder stage
        const LayerSpec& fine = specs[static_cast<size_t>(f - 1)];
        const LayerSpec& coarse = specs[static_cast<size_t>(f)];
        DecoderWeights dec;
        dec.g_psi = rng.affine(coarse.decoder_width + fine.feat_width, fine.decoder_width);
        dec.g1_focal = rng.affine(fine.decoder_width + class_count, fine.feat_width);
        dec.g2_out = rng.affine(fine.decoder_width, fine.decoder_width);
        if (mode == NonlocalMode::literal) {
            dec.g3_key = rng.affine(fine.feat_width, fine.decoder_width);
            dec.g4_query = rng.affine(fine.decoder_width, fine.decoder_width);
            dec.g5_value = rng.affine(fine.decoder_width, fine.decoder_width);
        } else {
            dec.g3_key = rng.affine(fine.feat_width, fine.decoder_width);
            dec.g4_query = rng.affine(fine.decoder_width, fine.decoder_width);
            dec.g5_value = rng.affine(fine.feat_width, fine.decoder_width);
        }
        dec.g6_head = rng.affine(fine.decoder_width, class_count);
        bundle.dec.push_back(std::move(dec));
    }

    bundle.g6_top = rng.affine(specs.back().decoder_width, class_count);
    bundle.head_fc1 = rng.affine(specs.front().decoder_width, 64);
    bundle.head_fc2 = rng.affine(64, 32);
    bundle.head_fc3 = rng.affine(32, class_count);
    return bundle;
}

}  // namespace iaf::net
