#include "iaf/neighbors.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace iaf {

namespace {

void check_k(int k, int n, bool self_inclusive) {
    const int limit = self_inclusive ? n : n - 1;
    if (k < 1 || k > limit) {
        throw ParameterError("knn: k=" + std::to_string(k) + " outside [1, " +
                             std::to_string(limit) + "] for n=" + std::to_string(n) +
                             (self_inclusive ? " (self included)" : " (self excluded)"));
    }
}

// Fills a (d2, idx) row for point i. Self-inclusive rows pin the point
// itself to slot 0 and search the k-1 nearest others.
template <typename QueryFn>
void fill_row(int i, int k, bool self_inclusive, std::vector<Neighbor>& buf,
              const QueryFn& query) {
    if (self_inclusive) {
        query(i, k - 1, buf);
        buf.insert(buf.begin(), Neighbor{0.0, i});
    } else {
        query(i, k, buf);
    }
}

}  // namespace

KdTree3 build_spatial_index(const PointCloud& cloud) {
    return KdTree3::build(cloud.positions());
}

NeighborList knn(const KdTree3& index, int k, bool self_inclusive) {
    const int n = index.size();
    check_k(k, n, self_inclusive);

    NeighborList result;
    result.indices.resize(n, k);
    result.distances.resize(n, k);
    result.space_tag = SpaceTag::euclidean;
    result.self_inclusive = self_inclusive;

    const RowMat3d& pts = index.points();
#pragma omp parallel
    {
        std::vector<Neighbor> buf;
#pragma omp for schedule(dynamic, 64)
        for (int i = 0; i < n; ++i) {
            fill_row(i, k, self_inclusive, buf, [&](int self, int kk, std::vector<Neighbor>& b) {
                index.query(pts.row(self).data(), kk, self, b);
            });
            for (int j = 0; j < k; ++j) {
                result.indices(i, j) = buf[static_cast<size_t>(j)].idx;
                result.distances(i, j) = std::sqrt(buf[static_cast<size_t>(j)].d2);
            }
        }
    }
    return result;
}

NeighborList knn_bruteforce(const RowMat3d& pts, int k, bool self_inclusive, SpaceTag tag) {
    const int n = static_cast<int>(pts.rows());
    check_k(k, n, self_inclusive);

    NeighborList result;
    result.indices.resize(n, k);
    result.distances.resize(n, k);
    result.space_tag = tag;
    result.self_inclusive = self_inclusive;

#pragma omp parallel
    {
        std::vector<Neighbor> all;
        std::vector<Neighbor> buf;
#pragma omp for schedule(dynamic, 16)
        for (int i = 0; i < n; ++i) {
            fill_row(i, k, self_inclusive, buf, [&](int self, int kk, std::vector<Neighbor>& b) {
                all.clear();
                all.reserve(static_cast<size_t>(n - 1));
                for (int j = 0; j < n; ++j) {
                    if (j == self) continue;
                    all.push_back(Neighbor{squared_dist3(pts.row(self).data(), pts.row(j).data()), j});
                }
                b.assign(static_cast<size_t>(kk), Neighbor{0.0, 0});
                std::partial_sort_copy(all.begin(), all.end(), b.begin(), b.end(), neighbor_less);
            });
            for (int j = 0; j < k; ++j) {
                result.indices(i, j) = buf[static_cast<size_t>(j)].idx;
                result.distances(i, j) = std::sqrt(buf[static_cast<size_t>(j)].d2);
            }
        }
    }
    return result;
}

NeighborList knn_bruteforce(const PointCloud& cloud, int k, bool self_inclusive) {
    return knn_bruteforce(cloud.positions(), k, self_inclusive, SpaceTag::euclidean);
}

void stream_knn(const KdTree3& index, int k, bool self_inclusive,
                const std::function<void(int, const Neighbor*, int)>& fn, bool sorted) {
    const int n = index.size();
    check_k(k, n, self_inclusive);
    const RowMat3d& pts = index.points();
#pragma omp parallel
    {
        std::vector<Neighbor> buf;
#pragma omp for schedule(dynamic, 64)
        for (int i = 0; i < n; ++i) {
            fill_row(i, k, self_inclusive, buf, [&](int self, int kk, std::vector<Neighbor>& b) {
                index.query(pts.row(self).data(), kk, self, b, sorted);
            });
            fn(i, buf.data(), k);
        }
    }
}

}  // namespace iaf
