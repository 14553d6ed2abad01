#include "iaf/fps.hpp"

#include <limits>

namespace iaf {

SampleIndex fps(const RowMat3d& pts, int m, int seed_index) {
    const int n = static_cast<int>(pts.rows());
    if (m < 1 || m > n) {
        throw ParameterError("fps: m=" + std::to_string(m) + " outside [1, " +
                             std::to_string(n) + "]");
    }
    if (seed_index < 0 || seed_index >= n) {
        throw ParameterError("fps: seed_index outside [0, n)");
    }

    SampleIndex sample;
    sample.seed_index = seed_index;
    sample.indices.reserve(static_cast<size_t>(m));
    sample.indices.push_back(seed_index);

    std::vector<double> min_d2(static_cast<size_t>(n),
                               std::numeric_limits<double>::infinity());
    std::vector<char> taken(static_cast<size_t>(n), 0);
    taken[static_cast<size_t>(seed_index)] = 1;

    int last = seed_index;
    for (int round = 1; round < m; ++round) {
        const double* p = pts.row(last).data();
#pragma omp parallel for schedule(static)
        for (int j = 0; j < n; ++j) {
            const double d2 = squared_dist3(p, pts.row(j).data());
            if (d2 < min_d2[static_cast<size_t>(j)]) min_d2[static_cast<size_t>(j)] = d2;
        }
        int best = -1;
        double best_d2 = -1.0;
        for (int j = 0; j < n; ++j) {
            if (taken[static_cast<size_t>(j)]) continue;
            if (min_d2[static_cast<size_t>(j)] > best_d2) {  // '>' keeps the smallest index on ties
                best_d2 = min_d2[static_cast<size_t>(j)];
                best = j;
            }
        }
        sample.indices.push_back(best);
        taken[static_cast<size_t>(best)] = 1;
        last = best;
    }
    return sample;
}

SampleIndex fps(const PointCloud& cloud, int m, int seed_index) {
    return fps(cloud.positions(), m, seed_index);
}

}  // namespace iaf
