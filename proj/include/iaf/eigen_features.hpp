#pragma once

#include "iaf/neighbors.hpp"
#include "iaf/point_cloud.hpp"

namespace iaf {

// Eigenvalues of a local 3x3 covariance, sorted descending. Units are
// squared meters; the sum equals the covariance trace.
struct EigenTuple {
    double l1 = 0.0, l2 = 0.0, l3 = 0.0;
};

// Population covariance (normalized by K) of point i's neighbor coordinates
// about their mean. Requires Euclidean self-inclusive neighbors with K >= 3.
Eigen::Matrix3d local_covariance(const PointCloud& cloud, const NeighborList& neighbors,
                                 int i);

// Eigenvalues of a symmetric matrix, descending; negatives above -1e-12 are
// clamped to zero. Input must be symmetric within 1e-12.
EigenTuple eigen_tuple(const Eigen::Matrix3d& cov);

// Per-point tuples for a whole cloud, as an N x 3 matrix (lambda1..lambda3).
RowMat3d eigen_tuples(const PointCloud& cloud, const NeighborList& neighbors);

// Exact KNN in the 3-d (lambda1, lambda2, lambda3) space, self-inclusive.
NeighborList eigen_knn(const RowMat3d& tuples, int k);

}  // namespace iaf
