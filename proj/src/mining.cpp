#include "iaf/mining.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace iaf {

namespace {

void check_mining_neighbors(const NeighborList& neighbors) {
    if (neighbors.space_tag != SpaceTag::euclidean) {
        throw ParameterError("local difference requires Euclidean-space neighbors");
    }
    if (neighbors.self_inclusive) {
        throw ParameterError("local difference requires self-excluded neighbors");
    }
}

// LD over an arbitrary row representation: sum over the K neighbors of the
// L2 distance between the point's row and the neighbor's row.
Eigen::VectorXd ld_rows(const RowMatXd& rows, const NeighborList& neighbors) {
    check_mining_neighbors(neighbors);
    if (rows.rows() != neighbors.n()) {
        throw ParameterError("local difference: row count does not match neighbor table");
    }
    const int n = neighbors.n();
    const int k = neighbors.k();
    Eigen::VectorXd ld(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            sum += (rows.row(i) - rows.row(neighbors.indices(i, j))).norm();
        }
        ld(i) = sum;
    }
    return ld;
}

}  // namespace

Eigen::VectorXd ld_geometry(const RowMatXd& properties, const NeighborList& neighbors) {
    return ld_rows(properties, neighbors);
}

Eigen::VectorXd ld_geometry(const PointCloud& cloud, const NeighborList& neighbors,
                            Ld1Channels channels) {
    if (channels == Ld1Channels::xyz) {
        return ld_rows(cloud.positions(), neighbors);
    }
    if (!cloud.has_colors()) {
        throw ConfigError("ld_geometry: xyzrgb channels requested but cloud has no colors");
    }
    RowMatXd props(cloud.size(), 6);
    props.leftCols<3>() = cloud.positions();
    props.rightCols<3>() = cloud.colors().cast<double>();
    return ld_rows(props, neighbors);
}

Eigen::VectorXd ld_semantic(const RowMatXd& probs, const NeighborList& neighbors) {
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const double sum = probs.row(i).sum();
        if (std::abs(sum - 1.0) > 1e-5) {
            throw ValidationError("ld_semantic: probability row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
        }
    }
    return ld_rows(probs, neighbors);
}

Eigen::VectorXd ld_feature(const RowMatXd& features, const NeighborList& neighbors) {
    return ld_rows(features, neighbors);
}

Eigen::VectorXd accumulate_ld(const RowMatXd& ld_raw, const std::array<double, 3>& mu) {
    if (ld_raw.cols() != 3) {
        throw ParameterError("accumulate_ld: expected an N x 3 matrix");
    }
    if (ld_raw.rows() < 1) {
        throw ParameterError("accumulate_ld: empty input");
    }
    if (!ld_raw.allFinite()) {
        throw ValidationError("accumulate_ld: non-finite local difference");
    }
    for (double m : mu) {
        if (m < 0.0 || m > 1.0) {
            throw ParameterError("accumulate_ld: mu weights must lie in [0, 1]");
        }
    }

    const Eigen::Index n = ld_raw.rows();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < 3; ++c) {
        const double lo = ld_raw.col(c).minCoeff();
        const double hi = ld_raw.col(c).maxCoeff();
        if (hi == lo || mu[static_cast<size_t>(c)] == 0.0) continue;  // no signal
        const double range = hi - lo;
        out += ((ld_raw.col(c).array() - lo) / range).matrix() * mu[static_cast<size_t>(c)];
    }
    return out;
}

std::vector<int> select_indistinguishable(const Eigen::VectorXd& ld, double tau) {
    if (tau < 1.0) {
        throw ParameterError("select_indistinguishable: tau must be >= 1");
    }
    const int n = static_cast<int>(ld.size());
    const int m = static_cast<int>(std::floor(static_cast<double>(n) / tau));

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + m, order.end(), [&](int a, int b) {
        return ld(a) > ld(b) || (ld(a) == ld(b) && a < b);
    });
    order.resize(static_cast<size_t>(m));
    return order;
}

MiningResult mine(const PointCloud& cloud, const RowMatXd* probs, const RowMatXd* features,
                  const MiningConfig& config) {
    const int n = cloud.size();
    if (config.k < 1) {
        throw ParameterError("mine: k must be >= 1");
    }
    if (probs == nullptr && config.mu[1] > 0.0) {
        throw ConfigError("mine: mu2 > 0 requires a prediction snapshot");
    }
    if (features == nullptr && config.mu[2] > 0.0) {
        throw ConfigError("mine: mu3 > 0 requires a feature snapshot");
    }

    MiningResult result;
    result.ld_raw = RowMatXd::Zero(n, 3);
    if (n > 1) {
        const int k = std::min(config.k, n - 1);
        const KdTree3 tree = KdTree3::build(cloud.positions());
        const NeighborList nbrs = knn(tree, k, /*self_inclusive=*/false);
        result.ld_raw.col(0) = ld_geometry(cloud, nbrs, config.ld1_channels);
        if (probs) result.ld_raw.col(1) = ld_semantic(*probs, nbrs);
        if (features) result.ld_raw.col(2) = ld_feature(*features, nbrs);
    }
    result.ld_accumulated = accumulate_ld(result.ld_raw, config.mu);
    result.selected = select_indistinguishable(result.ld_accumulated, config.tau);
    return result;
}

}  // namespace iaf
