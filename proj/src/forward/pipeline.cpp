#include "iaf/forward/pipeline.hpp"

#include <numeric>

#include "iaf/eigen_features.hpp"
#include "iaf/fps.hpp"

namespace iaf::net {

namespace {

RowMatXd gather_rows_d(const RowMatXd& src, const std::vector<int>& idx) {
    RowMatXd out(static_cast<Eigen::Index>(idx.size()), src.cols());
    for (size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = src.row(idx[i]);
    }
    return out;
}

RowMat3d gather_rows_3d(const RowMat3d& src, const std::vector<int>& idx) {
    RowMat3d out(static_cast<Eigen::Index>(idx.size()), 3);
    for (size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = src.row(idx[i]);
    }
    return out;
}

RowMatXf gather_rows_f(const RowMatXf& src, const std::vector<int>& idx) {
    RowMatXf out(static_cast<Eigen::Index>(idx.size()), src.cols());
    for (size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = src.row(idx[i]);
    }
    return out;
}

void standardize_columns(RowMatXf& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const float mean = m.col(c).mean();
        const float var = (m.col(c).array() - mean).square().sum() /
                          static_cast<float>(m.rows());
        const float scale = 1.0f / std::sqrt(var + 1e-6f);
        m.col(c) = (m.col(c).array() - mean) * scale;
    }
}

}  // namespace

PipelineResult forward_pipeline(const PointCloud& cloud, const std::vector<LayerSpec>& specs,
                                std::uint64_t seed, const PipelineConfig& config) {
    const int n = cloud.size();
    const int levels = static_cast<int>(specs.size());
    if (levels < 2) throw ParameterError("forward_pipeline: need at least two levels");
    for (int l = 0; l < levels; ++l) {
        if (specs[static_cast<size_t>(l)].n_points < 1) {
            throw ConfigError("forward_pipeline: layer " + std::to_string(l + 1) + " is empty");
        }
    }
    if (specs.front().n_points != n) {
        throw ConfigError("forward_pipeline: level-1 point count does not match the cloud");
    }

    int class_count = config.class_count;
    if (class_count < 1 && cloud.has_labels()) class_count = cloud.class_count();
    if (class_count < 1) {
        throw ConfigError("forward_pipeline: class count unknown (no labels and none configured)");
    }

    // Point properties entering the encoder concatenation: xyz plus colors.
    RowMatXd props;
    if (cloud.has_colors()) {
        props.resize(n, 6);
        props.leftCols<3>() = cloud.positions();
        props.rightCols<3>() = cloud.colors().cast<double>();
    } else {
        props = cloud.positions();
    }
    const int pos_width = static_cast<int>(props.cols());

    const WeightBundle weights =
        make_weights(specs, class_count, pos_width, seed, config.mode);

    // Initial features: per-point eigenvalue tuples over the full cloud.
    const KdTree3 full_tree = build_spatial_index(cloud);
    const int k_eig = std::max(3, std::min(config.k_eigen, n));
    const NeighborList eig_nbrs = knn(full_tree, k_eig, /*self_inclusive=*/true);
    const RowMat3d tuples = eigen_tuples(cloud, eig_nbrs);

    PipelineResult result;
    result.specs = specs;
    result.level_indices.resize(static_cast<size_t>(levels));
    result.features.x.resize(static_cast<size_t>(levels));
    result.features.y.resize(static_cast<size_t>(levels));
    result.features.z.resize(static_cast<size_t>(levels));

    // Sampling hierarchy. Level 1 keeps the input order; deeper levels take
    // the greedy order of farthest point sampling seeded at the first point
    // of the previous level.
    std::vector<int>& base = result.level_indices[0];
    base.resize(static_cast<size_t>(n));
    std::iota(base.begin(), base.end(), 0);
    for (int l = 1; l < levels; ++l) {
        const std::vector<int>& prev = result.level_indices[static_cast<size_t>(l - 1)];
        const RowMat3d prev_pts = gather_rows_3d(cloud.positions(), prev);
        const SampleIndex sample =
            fps(prev_pts, specs[static_cast<size_t>(l)].n_points, /*seed_index=*/0);
        std::vector<int>& cur = result.level_indices[static_cast<size_t>(l)];
        cur.reserve(sample.indices.size());
        for (int local : sample.indices) cur.push_back(prev[static_cast<size_t>(local)]);
    }

    // Encoder: dual-receptive-field aggregation at every level.
    std::vector<RowMat3d> level_pts(static_cast<size_t>(levels));
    std::vector<KdTree3> level_trees;
    level_trees.reserve(static_cast<size_t>(levels));
    RowMatXf feats = tuples.cast<float>();  // x^0
    for (int l = 0; l < levels; ++l) {
        const std::vector<int>& idx = result.level_indices[static_cast<size_t>(l)];
        level_pts[static_cast<size_t>(l)] = gather_rows_3d(cloud.positions(), idx);
        const RowMatXd level_props = gather_rows_d(props, idx);
        const RowMat3d level_tuples = gather_rows_3d(tuples, idx);
        const RowMatXf level_feats = l == 0 ? feats : gather_rows_f(feats, idx);

        level_trees.push_back(KdTree3::build(level_pts[static_cast<size_t>(l)]));
        const KdTree3 tuple_tree = KdTree3::build(level_tuples);
        const int n_l = static_cast<int>(idx.size());
        const int k1 = std::min(specs[static_cast<size_t>(l)].k1, n_l);
        const int k2 = std::min(specs[static_cast<size_t>(l)].k2, n_l);

        const EncoderWeights& enc = weights.enc[static_cast<size_t>(l)];
        NeighborList e1 = knn(level_trees.back(), k1, true);
        NeighborList g1 = knn(tuple_tree, k1, true);
        g1.space_tag = SpaceTag::eigenvalue;
        RowMatXf x_l = gbaa_block(level_props, level_feats, e1, g1, enc);
        if (k2 != k1) {
            NeighborList e2 = knn(level_trees.back(), k2, true);
            NeighborList g2 = knn(tuple_tree, k2, true);
            g2.space_tag = SpaceTag::eigenvalue;
            x_l = multi_scale_combine(x_l, gbaa_block(level_props, level_feats, e2, g2, enc));
        } else {
            x_l = multi_scale_combine(x_l, x_l);
        }
        if (config.standardize) standardize_columns(x_l);

        result.features.x[static_cast<size_t>(l)] = x_l;
        // Deeper levels gather from the full-resolution feature rows of this
        // level, so keep a full-size copy only of the current level.
        feats = RowMatXf::Zero(n, x_l.cols());
        for (size_t i = 0; i < idx.size(); ++i) {
            feats.row(idx[i]) = x_l.row(static_cast<Eigen::Index>(i));
        }
    }

    // Decoder: start at the deepest level and walk back to level 1.
    const int top = levels - 1;
    result.features.y[static_cast<size_t>(top)] = result.features.x[static_cast<size_t>(top)];
    result.features.z[static_cast<size_t>(top)] = predict_probs(
        weights.g6_top.apply(result.features.y[static_cast<size_t>(top)]).cast<double>());

    for (int f = top - 1; f >= 0; --f) {  // f: fine level index (0-based)
        const DecoderWeights& dec = weights.dec[static_cast<size_t>(f)];
        const RowMat3d& fine_pos = level_pts[static_cast<size_t>(f)];
        const RowMat3d& coarse_pos = level_pts[static_cast<size_t>(f + 1)];
        const RowMatXf& y_coarse = result.features.y[static_cast<size_t>(f + 1)];
        const RowMatXd& z_coarse = result.features.z[static_cast<size_t>(f + 1)];

        const RowMatXd z_up = interpolate_rows(z_coarse, coarse_pos, fine_pos);
        RowMatXf y_fp = feature_propagate(y_coarse, coarse_pos, fine_pos,
                                          result.features.x[static_cast<size_t>(f)], dec.g_psi);
        if (config.standardize) standardize_columns(y_fp);

        // Mining on the fine level: geometry, propagated predictions and
        // propagated features.
        const int n_f = static_cast<int>(fine_pos.rows());
        RowMatXd ld_raw = RowMatXd::Zero(n_f, 3);
        if (n_f > 1) {
            const int k_mine = std::min(config.mining.k, n_f - 1);
            const NeighborList mine_nbrs =
                knn(level_trees[static_cast<size_t>(f)], k_mine, false);
            ld_raw.col(0) = ld_geometry(RowMatXd(fine_pos), mine_nbrs);
            ld_raw.col(1) = ld_semantic(z_up, mine_nbrs);
            ld_raw.col(2) = ld_feature(y_fp.cast<double>(), mine_nbrs);
        }
        const Eigen::VectorXd ld = accumulate_ld(ld_raw, config.mining.mu);
        const std::vector<int> selected = select_indistinguishable(ld, config.mining.tau);

        const RowMatXf focal = focalize_features(y_fp, z_up, selected, dec.g1_focal);
        RowMatXf y_f = nonlocal_update(y_fp, focal, dec, config.mode, config.residual);
        if (config.standardize) standardize_columns(y_f);

        result.features.y[static_cast<size_t>(f)] = y_f;
        result.features.z[static_cast<size_t>(f)] =
            predict_probs(dec.g6_head.apply(y_f).cast<double>());
    }

    // Final prediction head on the level-1 decoder features.
    const RowMatXf& y1 = result.features.y[0];
    const RowMatXf h1 = leaky_relu(weights.head_fc1.apply(y1));
    const RowMatXf h2 = leaky_relu(weights.head_fc2.apply(h1));
    result.final_probs = predict_probs(weights.head_fc3.apply(h2).cast<double>());

    if (cloud.has_labels()) {
        result.has_losses = true;
        const Eigen::VectorXi& gt = cloud.gt_labels();
        for (int l = 0; l < levels && l < 5; ++l) {
            const std::vector<int>& idx = result.level_indices[static_cast<size_t>(l)];
            Eigen::VectorXi level_gt(static_cast<Eigen::Index>(idx.size()));
            for (size_t i = 0; i < idx.size(); ++i) {
                level_gt(static_cast<Eigen::Index>(i)) = gt(idx[i]);
            }
            result.stage_losses[static_cast<size_t>(l)] =
                multi_stage_loss(result.features.z[static_cast<size_t>(l)], level_gt);
        }
        result.prediction_loss = multi_stage_loss(result.final_probs, gt);
        result.total_loss = final_loss(result.stage_losses, result.prediction_loss);
    }
    return result;
}

}  // namespace iaf::net
