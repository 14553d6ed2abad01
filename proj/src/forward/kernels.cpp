#include "iaf/forward/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iaf::net {

namespace {

void check_same_k(const NeighborList& a, const NeighborList& b) {
    if (!a.self_inclusive || !b.self_inclusive) {
        throw ConfigError("gbaa: neighbor lists must be self-inclusive");
    }
    if (a.k() != b.k() || a.n() != b.n()) {
        throw ConfigError("gbaa: Euclidean and eigenvalue neighbor tables disagree in shape");
    }
}

}  // namespace

RowMatXf gbaa_concat(const RowMatXd& props, const RowMatXf& feats,
                     const NeighborList& euclid_nbrs, const NeighborList& eigen_nbrs, int i) {
    check_same_k(euclid_nbrs, eigen_nbrs);
    if (props.rows() != feats.rows() || props.rows() != euclid_nbrs.n()) {
        throw ConfigError("gbaa: property/feature/neighbor row counts disagree");
    }
    if (i < 0 || i >= euclid_nbrs.n()) {
        throw ParameterError("gbaa: point index out of range");
    }

    const int k = euclid_nbrs.k();
    const int p = static_cast<int>(props.cols());
    const int d = static_cast<int>(feats.cols());
    RowMatXf out(k, 2 * p + 2 * d);
    for (int j = 0; j < k; ++j) {
        const int e_idx = euclid_nbrs.indices(i, j);
        const int g_idx = eigen_nbrs.indices(i, j);
        out.block(j, 0, 1, p) = (props.row(e_idx) - props.row(i)).cast<float>();
        out.block(j, p, 1, p) = props.row(i).cast<float>();
        out.block(j, 2 * p, 1, d) = feats.row(e_idx);
        out.block(j, 2 * p + d, 1, d) = feats.row(g_idx);
    }
    return out;
}

RowMatXf gbaa_aggregate(const RowMatXd& props, const RowMatXf& feats,
                        const NeighborList& euclid_nbrs, const NeighborList& eigen_nbrs,
                        const Affine& g1_a, const Affine& g1_b, int i) {
    const RowMatXf concat = gbaa_concat(props, feats, euclid_nbrs, eigen_nbrs, i);
    return leaky_relu(g1_b.apply(leaky_relu(g1_a.apply(concat))));
}

Eigen::RowVectorXf attentive_pool(const Eigen::Ref<const RowMatXf>& local,
                                  const Affine& score) {
    if (local.rows() < 1) throw ParameterError("attentive_pool: K must be >= 1");
    const RowMatXf scores = score.apply(local);
    if (scores.cols() != local.cols()) {
        throw ConfigError("attentive_pool: score map must preserve channel count");
    }

    const int k = static_cast<int>(local.rows());
    const int d = static_cast<int>(local.cols());
    Eigen::RowVectorXf out(d);
    for (int c = 0; c < d; ++c) {
        float max_score = scores(0, c);
        for (int j = 1; j < k; ++j) max_score = std::max(max_score, scores(j, c));
        float denom = 0.0f;
        for (int j = 0; j < k; ++j) denom += std::exp(scores(j, c) - max_score);
        float acc = 0.0f;
        for (int j = 0; j < k; ++j) {
            acc += std::exp(scores(j, c) - max_score) / denom * local(j, c);
        }
        out(c) = acc;
    }
    return out;
}

RowMatXf multi_scale_combine(const RowMatXf& a, const RowMatXf& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ConfigError("multi_scale_combine: shape mismatch");
    }
    return a + b;
}

RowMatXf gbaa_block(const RowMatXd& props, const RowMatXf& feats,
                    const NeighborList& euclid_nbrs, const NeighborList& eigen_nbrs,
                    const EncoderWeights& weights) {
    const int n = euclid_nbrs.n();
    RowMatXf out(n, weights.g1_b.out());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const RowMatXf local =
            gbaa_aggregate(props, feats, euclid_nbrs, eigen_nbrs, weights.g1_a, weights.g1_b, i);
        out.row(i) = attentive_pool(local, weights.g2_score);
    }
    return out;
}

namespace {

struct InterpStencil {
    int idx[3];
    double w[3];
    int count;
};

// Shared 3-neighbor inverse-square-distance stencil. Falls back to all
// available neighbors when the coarse set is smaller than 3; an exact hit
// keeps only the coincident coarse point.
InterpStencil interp_stencil(const KdTree3& tree, const double* q) {
    InterpStencil st{};
    const int k = std::min(3, tree.size());
    std::vector<Neighbor> nbrs;
    tree.query(q, k, -1, nbrs);
    if (nbrs[0].d2 == 0.0) {
        st.count = 1;
        st.idx[0] = nbrs[0].idx;
        st.w[0] = 1.0;
        return st;
    }
    double total = 0.0;
    for (int j = 0; j < k; ++j) total += 1.0 / nbrs[static_cast<size_t>(j)].d2;
    st.count = k;
    for (int j = 0; j < k; ++j) {
        st.idx[j] = nbrs[static_cast<size_t>(j)].idx;
        st.w[j] = (1.0 / nbrs[static_cast<size_t>(j)].d2) / total;
    }
    return st;
}

template <typename Mat>
Mat interpolate_impl(const Eigen::Ref<const Mat>& coarse_rows, const RowMat3d& coarse_pos,
                     const RowMat3d& fine_pos) {
    if (coarse_rows.rows() != coarse_pos.rows()) {
        throw ConfigError("interpolate: coarse rows do not match coarse positions");
    }
    const KdTree3 tree = KdTree3::build(coarse_pos);
    const int n = static_cast<int>(fine_pos.rows());
    Mat out(n, coarse_rows.cols());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const InterpStencil st = interp_stencil(tree, fine_pos.row(i).data());
        if (st.count == 1 && st.w[0] == 1.0) {
            out.row(i) = coarse_rows.row(st.idx[0]);  // exact hit: copy bit-for-bit
            continue;
        }
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(coarse_rows.cols());
        for (int j = 0; j < st.count; ++j) {
            acc += st.w[j] * coarse_rows.row(st.idx[j]).template cast<double>();
        }
        out.row(i) = acc.template cast<typename Mat::Scalar>();
    }
    return out;
}

}  // namespace

RowMatXf interpolate_features(const Eigen::Ref<const RowMatXf>& coarse_feats,
                              const RowMat3d& coarse_pos, const RowMat3d& fine_pos) {
    return interpolate_impl<RowMatXf>(coarse_feats, coarse_pos, fine_pos);
}

RowMatXd interpolate_rows(const Eigen::Ref<const RowMatXd>& coarse_rows,
                          const RowMat3d& coarse_pos, const RowMat3d& fine_pos) {
    return interpolate_impl<RowMatXd>(coarse_rows, coarse_pos, fine_pos);
}

RowMatXf feature_propagate(const RowMatXf& coarse_feats, const RowMat3d& coarse_pos,
                           const RowMat3d& fine_pos, const RowMatXf& skip_feats,
                           const Affine& g_psi) {
    if (skip_feats.rows() != fine_pos.rows()) {
        throw ConfigError("feature_propagate: skip features do not match fine positions");
    }
    const RowMatXf up = interpolate_features(coarse_feats, coarse_pos, fine_pos);
    RowMatXf cat(fine_pos.rows(), up.cols() + skip_feats.cols());
    cat << up, skip_feats;
    return leaky_relu(g_psi.apply(cat));
}

RowMatXf focalize_features(const RowMatXf& y_fp, const RowMatXd& z_up,
                           const std::vector<int>& selected, const Affine& g1_focal) {
    if (y_fp.rows() != z_up.rows()) {
        throw ConfigError("focalize: y_fp and z_up row counts disagree");
    }
    const int m = static_cast<int>(selected.size());
    RowMatXf cat(m, y_fp.cols() + z_up.cols());
    for (int j = 0; j < m; ++j) {
        const int idx = selected[static_cast<size_t>(j)];
        if (idx < 0 || idx >= y_fp.rows()) {
            throw ParameterError("focalize: selected index out of range");
        }
        cat.block(j, 0, 1, y_fp.cols()) = y_fp.row(idx);
        cat.block(j, y_fp.cols(), 1, z_up.cols()) = z_up.row(idx).cast<float>();
    }
    if (m == 0) {
        return RowMatXf(0, g1_focal.out());
    }
    return leaky_relu(g1_focal.apply(cat));
}

RowMatXd nonlocal_affinities(const RowMatXf& y_fp, const RowMatXf& focal,
                             const DecoderWeights& weights) {
    const RowMatXf keys = weights.g3_key.apply(focal);       // M x H
    const RowMatXf queries = weights.g4_query.apply(y_fp);   // N x H
    const int n = static_cast<int>(y_fp.rows());
    const int m = static_cast<int>(focal.rows());
    RowMatXd aff(n, m);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double max_dot = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
            const double dot = queries.row(i).cast<double>().dot(keys.row(j).cast<double>());
            aff(i, j) = dot;
            max_dot = std::max(max_dot, dot);
        }
        double denom = 0.0;
        for (int j = 0; j < m; ++j) denom += std::exp(aff(i, j) - max_dot);
        for (int j = 0; j < m; ++j) aff(i, j) = std::exp(aff(i, j) - max_dot) / denom;
    }
    return aff;
}

RowMatXf nonlocal_update(const RowMatXf& y_fp, const RowMatXf& focal,
                         const DecoderWeights& weights, NonlocalMode mode, bool residual) {
    if (mode != NonlocalMode::literal && mode != NonlocalMode::attention) {
        throw ParameterError("nonlocal_update: unknown mode");
    }
    const int n = static_cast<int>(y_fp.rows());
    const int m = static_cast<int>(focal.rows());

    if (m == 0) {
        // No focal set: nothing to aggregate against, pass features through.
        return residual ? y_fp : leaky_relu(weights.g2_out.apply(RowMatXf::Zero(n, y_fp.cols())));
    }

    RowMatXf out(n, y_fp.cols());
    if (mode == NonlocalMode::literal) {
        // sum_j (g3(x_j) . g4(y_i)) . g5(y_i) == (sum_j g3(x_j)) . g4(y_i) . g5(y_i)
        const RowMatXf keys = leaky_relu(weights.g3_key.apply(focal));
        const Eigen::RowVectorXf key_sum = keys.colwise().sum();
        const RowMatXf q = leaky_relu(weights.g4_query.apply(y_fp));
        const RowMatXf v = leaky_relu(weights.g5_value.apply(y_fp));
        RowMatXf mixed(n, key_sum.cols());
        for (int i = 0; i < n; ++i) {
            mixed.row(i) = key_sum.cwiseProduct(q.row(i)).cwiseProduct(v.row(i));
        }
        out = leaky_relu(weights.g2_out.apply(mixed));
    } else {
        const RowMatXd aff = nonlocal_affinities(y_fp, focal, weights);
        const RowMatXf values = weights.g5_value.apply(focal);  // M x D'
        RowMatXf mixed(n, values.cols());
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(values.cols());
            for (int j = 0; j < m; ++j) {
                acc += aff(i, j) * values.row(j).cast<double>();
            }
            mixed.row(i) = acc.cast<float>();
        }
        out = weights.g2_out.apply(mixed);
    }
    if (residual) out += y_fp;
    return out;
}

RowMatXd predict_probs(const Eigen::Ref<const RowMatXd>& logits) {
    const Eigen::Index n = logits.rows();
    const Eigen::Index c = logits.cols();
    RowMatXd probs(n, c);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double max_logit = logits.row(i).maxCoeff();
        double denom = 0.0;
        for (Eigen::Index j = 0; j < c; ++j) {
            probs(i, j) = std::exp(logits(i, j) - max_logit);
            denom += probs(i, j);
        }
        probs.row(i) /= denom;
    }
    return probs;
}

double multi_stage_loss(const RowMatXd& probs, const Eigen::VectorXi& labels) {
    if (probs.rows() != labels.size()) {
        throw ValidationError("multi_stage_loss: row count does not match label count");
    }
    if (probs.rows() < 1) {
        throw ValidationError("multi_stage_loss: empty input");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const int label = labels(i);
        if (label < 0 || label >= probs.cols()) {
            throw ValidationError("multi_stage_loss: label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(probs.cols()) + ") at row " +
                                  std::to_string(i));
        }
        total += -std::log(std::max(probs(i, label), 1e-12));
    }
    return total / static_cast<double>(probs.rows());
}

double final_loss(const std::array<double, 5>& stage_losses, double prediction_loss) {
    double total = prediction_loss;
    for (double l : stage_losses) total += l;
    return total;
}

}  // namespace iaf::net
