#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace fixtures {

iaf::RowMat3d random_positions(int n, std::uint64_t seed, double extent) {
    std::mt19937_64 rng(seed);
    auto uniform = [&]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    iaf::RowMat3d pts(n, 3);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < 3; ++d) pts(i, d) = uniform() * extent;
    }
    return pts;
}

iaf::RowMat3d plane_grid(int nx, int ny) {
    iaf::RowMat3d pts(nx * ny, 3);
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const int i = y * nx + x;
            pts(i, 0) = static_cast<double>(x);
            pts(i, 1) = static_cast<double>(y);
            pts(i, 2) = 0.0;
        }
    }
    return pts;
}

Scene random_scene(int n, int classes, double flip_rate, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    const double extent = 10.0;
    iaf::RowMat3d pts(n, 3);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < 3; ++d) pts(i, d) = uniform() * extent;
    }

    // Slabs of equal width along x define the classes.
    Eigen::VectorXi gt(n);
    for (int i = 0; i < n; ++i) {
        int c = static_cast<int>(pts(i, 0) / extent * classes);
        gt(i) = std::clamp(c, 0, classes - 1);
    }

    Eigen::VectorXi pred = gt;
    for (int i = 0; i < n; ++i) {
        if (uniform() < flip_rate && classes > 1) {
            pred(i) = (gt(i) + 1 + static_cast<int>(rng() % static_cast<unsigned>(classes - 1))) %
                      classes;
        }
    }
    // One solid wrong ball so large-fraction areas exist too.
    const Eigen::RowVector3d center(uniform() * extent, uniform() * extent, uniform() * extent);
    const double radius = extent * 0.15;
    for (int i = 0; i < n; ++i) {
        if ((pts.row(i) - center).norm() < radius && classes > 1) {
            pred(i) = (gt(i) + 1) % classes;
        }
    }

    return Scene{iaf::PointCloud(std::move(pts), std::nullopt, gt, classes), std::move(pred)};
}

PlantedFixture planted_fixture() {
    constexpr int nx = 80, ny = 50;
    iaf::RowMat3d pts = plane_grid(nx, ny);
    const int n = nx * ny;

    // Two ground-truth classes split at x = 15.5.
    Eigen::VectorXi gt(n);
    for (int i = 0; i < n; ++i) gt(i) = pts(i, 0) < 15.5 ? 0 : 1;

    Eigen::VectorXi pred = gt;
    auto flip = [&](int i) { pred(i) = 1 - gt(i); };

    std::vector<int> band, region, blob;
    // Band: six columns straddling the class interface.
    for (int i = 0; i < n; ++i) {
        const double x = pts(i, 0);
        if (x >= 13.0 && x <= 18.0) {
            flip(i);
            band.push_back(i);
        }
    }
    // Region: the x >= 48 slab, 32 of 80 columns = 40% of the cloud.
    for (int i = 0; i < n; ++i) {
        if (pts(i, 0) >= 48.0) {
            flip(i);
            region.push_back(i);
        }
    }
    // Blob: the 30 grid points closest to an anchor well away from both.
    const double ax = 33.2, ay = 25.3;
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = std::pow(pts(a, 0) - ax, 2) + std::pow(pts(a, 1) - ay, 2);
        const double db = std::pow(pts(b, 0) - ax, 2) + std::pow(pts(b, 1) - ay, 2);
        return da < db || (da == db && a < b);
    });
    for (int j = 0; j < 30; ++j) {
        flip(order[static_cast<size_t>(j)]);
        blob.push_back(order[static_cast<size_t>(j)]);
    }
    std::sort(blob.begin(), blob.end());

    return PlantedFixture{iaf::PointCloud(std::move(pts), std::nullopt, gt, 2),
                          std::move(pred),
                          std::move(blob),
                          std::move(band),
                          std::move(region),
                          /*k=*/100};
}

}  // namespace fixtures
