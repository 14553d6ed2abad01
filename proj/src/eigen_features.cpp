#include "iaf/eigen_features.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace iaf {

namespace {

void check_neighbor_frame(const NeighborList& neighbors) {
    if (neighbors.space_tag != SpaceTag::euclidean) {
        throw ParameterError("local covariance requires Euclidean-space neighbors");
    }
    if (!neighbors.self_inclusive) {
        throw ParameterError("local covariance requires self-inclusive neighbors");
    }
    if (neighbors.k() < 3) {
        throw ParameterError("local covariance requires K >= 3, got K=" +
                             std::to_string(neighbors.k()));
    }
}

}  // namespace

Eigen::Matrix3d local_covariance(const PointCloud& cloud, const NeighborList& neighbors,
                                 int i) {
    check_neighbor_frame(neighbors);
    if (i < 0 || i >= neighbors.n() || neighbors.n() != cloud.size()) {
        throw ParameterError("local covariance: point index out of range");
    }

    const int k = neighbors.k();
    const RowMat3d& pts = cloud.positions();

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int j = 0; j < k; ++j) {
        mean += pts.row(neighbors.indices(i, j)).transpose();
    }
    mean /= static_cast<double>(k);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int j = 0; j < k; ++j) {
        const Eigen::Vector3d d = pts.row(neighbors.indices(i, j)).transpose() - mean;
        for (int r = 0; r < 3; ++r) {
            for (int c = r; c < 3; ++c) {
                cov(r, c) += d(r) * d(c);
            }
        }
    }
    cov /= static_cast<double>(k);
    // Mirror the upper triangle so the result is symmetric bit-for-bit.
    cov(1, 0) = cov(0, 1);
    cov(2, 0) = cov(0, 2);
    cov(2, 1) = cov(1, 2);
    return cov;
}

EigenTuple eigen_tuple(const Eigen::Matrix3d& cov) {
    for (int r = 0; r < 3; ++r) {
        for (int c = r + 1; c < 3; ++c) {
            if (std::abs(cov(r, c) - cov(c, r)) > 1e-12) {
                throw ParameterError("eigen_tuple: matrix is not symmetric within 1e-12");
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
    solver.compute(cov, Eigen::EigenvaluesOnly);
    Eigen::Vector3d ev = solver.eigenvalues();  // ascending
    for (int j = 0; j < 3; ++j) {
        if (ev(j) < 0.0 && ev(j) > -1e-12) ev(j) = 0.0;
    }
    return EigenTuple{ev(2), ev(1), ev(0)};
}

RowMat3d eigen_tuples(const PointCloud& cloud, const NeighborList& neighbors) {
    if (neighbors.n() != cloud.size()) {
        throw ParameterError("eigen_tuples: neighbor table does not match cloud");
    }
    const int n = cloud.size();
    RowMat3d tuples(n, 3);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const EigenTuple t = eigen_tuple(local_covariance(cloud, neighbors, i));
        tuples(i, 0) = t.l1;
        tuples(i, 1) = t.l2;
        tuples(i, 2) = t.l3;
    }
    return tuples;
}

NeighborList eigen_knn(const RowMat3d& tuples, int k) {
    KdTree3 tree = KdTree3::build(tuples);
    NeighborList result = knn(tree, k, /*self_inclusive=*/true);
    result.space_tag = SpaceTag::eigenvalue;
    return result;
}

}  // namespace iaf
