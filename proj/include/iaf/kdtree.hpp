#pragma once

#include <vector>

#include "iaf/common.hpp"

namespace iaf {

struct Neighbor {
    double d2;  // squared Euclidean distance
    int idx;
};

// Global tie-break rule: order candidates by (squared distance, index).
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.idx < b.idx);
}

// Static median-split tree over a fixed 3-d point set. Queries are exact:
// they return the k smallest (squared distance, index) pairs, so output is
// bit-identical to a brute-force scan under the same tie-break. Immutable
// after build; queries are const and may run concurrently.
class KdTree3 {
public:
    static KdTree3 build(const RowMat3d& pts, int leaf_size = 32);

    int size() const { return n_; }
    const RowMat3d& points() const { return pts_; }

    // k nearest neighbors of q; skip >= 0 removes that point id from the
    // candidate set. out is overwritten, ascending by (d2, idx) when sorted
    // is set, in unspecified (but deterministic) order otherwise.
    void query(const double* q, int k, int skip, std::vector<Neighbor>& out,
               bool sorted = true) const;

private:
    struct Node {
        double split;
        std::int32_t dim;          // -1 marks a leaf
        std::int32_t left, right;  // child node ids
        std::int32_t begin, end;   // leaf payload range
    };

    int build_node(std::vector<int>& order, int begin, int end, int leaf_size);
    void search_heap(int node_id, const double* q, int k, int skip,
                     std::vector<Neighbor>& heap) const;
    struct Collector;
    void search_collect(int node_id, const double* q, int k, int skip, Collector& col) const;

    RowMat3d pts_;                      // original order, for callers
    std::vector<double> leaf_xyz_;      // interleaved coordinates in leaf order
    std::vector<std::int32_t> leaf_id_;
    std::vector<Node> nodes_;
    int n_ = 0;
    int root_ = -1;
};

}  // namespace iaf
