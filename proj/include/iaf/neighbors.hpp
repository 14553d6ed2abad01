#pragma once

#include <functional>

#include "iaf/kdtree.hpp"
#include "iaf/point_cloud.hpp"

namespace iaf {

enum class SpaceTag { euclidean, eigenvalue };

// Per-point K nearest neighbor table. Each row is sorted by non-decreasing
// distance with ties broken by ascending index. A self-inclusive row holds
// the point itself first (distance 0) followed by its K-1 nearest others.
struct NeighborList {
    RowMatXi indices;
    RowMatXd distances;  // true Euclidean (square roots of the search metric)
    SpaceTag space_tag = SpaceTag::euclidean;
    bool self_inclusive = false;

    int n() const { return static_cast<int>(indices.rows()); }
    int k() const { return static_cast<int>(indices.cols()); }
};

KdTree3 build_spatial_index(const PointCloud& cloud);

// Exact KNN for every point of the indexed set.
// Requires k <= N when self_inclusive, k <= N-1 otherwise.
NeighborList knn(const KdTree3& index, int k, bool self_inclusive);

// O(N^2) reference with the same contract; output is bit-identical to knn().
NeighborList knn_bruteforce(const PointCloud& cloud, int k, bool self_inclusive);
NeighborList knn_bruteforce(const RowMat3d& pts, int k, bool self_inclusive,
                            SpaceTag tag = SpaceTag::euclidean);

// Streaming variant for large clouds: fn(i, row, k) receives each point's
// neighbor row without materializing the full table. fn runs concurrently
// for different i and must only touch state owned by i. Counting consumers
// can pass sorted = false; the row is then in unspecified order (and a
// self-inclusive row holds the point itself in slot 0 regardless).
void stream_knn(const KdTree3& index, int k, bool self_inclusive,
                const std::function<void(int, const Neighbor*, int)>& fn, bool sorted = true);

}  // namespace iaf
