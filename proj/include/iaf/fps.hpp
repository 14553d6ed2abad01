#pragma once

#include <vector>

#include "iaf/point_cloud.hpp"

namespace iaf {

// Result of farthest point sampling: indices[0] == seed_index, all distinct.
struct SampleIndex {
    std::vector<int> indices;
    int seed_index = 0;
};

// Greedy max-min sampling: each appended point maximizes its minimum distance
// to the already-selected set, ties broken by ascending index. Deterministic.
SampleIndex fps(const RowMat3d& pts, int m, int seed_index);
SampleIndex fps(const PointCloud& cloud, int m, int seed_index);

}  // namespace iaf
