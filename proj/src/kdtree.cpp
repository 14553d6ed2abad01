#include "iaf/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace iaf {

KdTree3 KdTree3::build(const RowMat3d& pts, int leaf_size) {
    if (pts.rows() < 1) {
        throw ValidationError("spatial index requires at least one point");
    }
    if (!pts.allFinite()) {
        throw ValidationError("spatial index input contains a non-finite coordinate");
    }
    if (leaf_size < 1) {
        throw ParameterError("leaf_size must be positive");
    }

    KdTree3 tree;
    tree.pts_ = pts;
    tree.n_ = static_cast<int>(pts.rows());
    tree.nodes_.reserve(static_cast<size_t>(2 * tree.n_ / leaf_size + 4));

    std::vector<int> order(static_cast<size_t>(tree.n_));
    std::iota(order.begin(), order.end(), 0);
    tree.leaf_id_.resize(static_cast<size_t>(tree.n_));
    tree.leaf_xyz_.resize(static_cast<size_t>(3 * tree.n_));
    tree.root_ = tree.build_node(order, 0, tree.n_, leaf_size);
    return tree;
}

int KdTree3::build_node(std::vector<int>& order, int begin, int end, int leaf_size) {
    double lo[3], hi[3];
    for (int d = 0; d < 3; ++d) {
        lo[d] = hi[d] = pts_(order[static_cast<size_t>(begin)], d);
    }
    for (int i = begin + 1; i < end; ++i) {
        for (int d = 0; d < 3; ++d) {
            const double v = pts_(order[static_cast<size_t>(i)], d);
            lo[d] = std::min(lo[d], v);
            hi[d] = std::max(hi[d], v);
        }
    }
    int dim = 0;
    double extent = hi[0] - lo[0];
    for (int d = 1; d < 3; ++d) {
        if (hi[d] - lo[d] > extent) {
            extent = hi[d] - lo[d];
            dim = d;
        }
    }

    // Duplicate-heavy ranges collapse to a leaf regardless of size.
    if (end - begin <= leaf_size || extent == 0.0) {
        Node node;
        node.dim = -1;
        node.split = 0.0;
        node.left = node.right = -1;
        node.begin = begin;
        node.end = end;
        for (int i = begin; i < end; ++i) {
            const int id = order[static_cast<size_t>(i)];
            leaf_id_[static_cast<size_t>(i)] = id;
            for (int d = 0; d < 3; ++d) {
                leaf_xyz_[static_cast<size_t>(3 * i + d)] = pts_(id, d);
            }
        }
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }

    const int mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) {
                         const double va = pts_(a, dim), vb = pts_(b, dim);
                         return va < vb || (va == vb && a < b);
                     });
    const double split = pts_(order[static_cast<size_t>(mid)], dim);

    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
    const int left = build_node(order, begin, mid, leaf_size);
    const int right = build_node(order, mid, end, leaf_size);
    nodes_[static_cast<size_t>(self)] =
        Node{split, static_cast<std::int32_t>(dim), static_cast<std::int32_t>(left),
             static_cast<std::int32_t>(right), static_cast<std::int32_t>(begin),
             static_cast<std::int32_t>(end)};
    return self;
}

void KdTree3::search_heap(int node_id, const double* q, int k, int skip,
                          std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[static_cast<size_t>(node_id)];
    if (node.dim < 0) {
        for (int p = node.begin; p < node.end; ++p) {
            const int id = leaf_id_[static_cast<size_t>(p)];
            if (id == skip) continue;
            const Neighbor cand{squared_dist3(q, &leaf_xyz_[static_cast<size_t>(3 * p)]), id};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), neighbor_less);
            } else if (neighbor_less(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), neighbor_less);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), neighbor_less);
            }
        }
        return;
    }

    const double diff = q[node.dim] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search_heap(near, q, k, skip, heap);
    // The far side is a lower bound at diff^2; on exact equality a smaller
    // index could still displace the current worst, so prune only on '>'.
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().d2) {
        search_heap(far, q, k, skip, heap);
    }
}

// Large-k strategy: collect candidates below a lazily tightened bound and
// median-select once the buffer doubles. Far cheaper per candidate than a
// binary heap when k is in the hundreds; the result set is identical.
struct KdTree3::Collector {
    std::vector<Neighbor>& cand;
    int k;
    double bound = std::numeric_limits<double>::infinity();
    int bound_idx = std::numeric_limits<int>::max();

    bool admits(double d2, int idx) const {
        return d2 < bound || (d2 == bound && idx < bound_idx);
    }
    void shrink() {
        std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end(), neighbor_less);
        cand.resize(static_cast<size_t>(k));
        bound = cand[static_cast<size_t>(k - 1)].d2;
        bound_idx = cand[static_cast<size_t>(k - 1)].idx;
    }
};

void KdTree3::search_collect(int node_id, const double* q, int k, int skip,
                             Collector& col) const {
    const Node& node = nodes_[static_cast<size_t>(node_id)];
    if (node.dim < 0) {
        for (int p = node.begin; p < node.end; ++p) {
            const int id = leaf_id_[static_cast<size_t>(p)];
            if (id == skip) continue;
            const double d2 = squared_dist3(q, &leaf_xyz_[static_cast<size_t>(3 * p)]);
            if (col.admits(d2, id)) {
                col.cand.push_back(Neighbor{d2, id});
                if (col.cand.size() >= static_cast<size_t>(2 * k)) col.shrink();
            }
        }
        return;
    }

    const double diff = q[node.dim] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search_collect(near, q, k, skip, col);
    if (static_cast<int>(col.cand.size()) < k || diff * diff <= col.bound) {
        search_collect(far, q, k, skip, col);
    }
}

void KdTree3::query(const double* q, int k, int skip, std::vector<Neighbor>& out,
                    bool sorted) const {
    out.clear();
    if (k <= 0) return;
    const int available = n_ - (skip >= 0 && skip < n_ ? 1 : 0);
    if (k > available) {
        throw ParameterError("knn: k=" + std::to_string(k) + " exceeds available points (" +
                             std::to_string(available) + ")");
    }
    if (k >= 64) {
        out.reserve(static_cast<size_t>(2 * k));
        Collector col{out, k};
        search_collect(root_, q, k, skip, col);
        if (out.size() > static_cast<size_t>(k)) col.shrink();
    } else {
        out.reserve(static_cast<size_t>(k));
        search_heap(root_, q, k, skip, out);
    }
    if (sorted) std::sort(out.begin(), out.end(), neighbor_less);
}

}  // namespace iaf
