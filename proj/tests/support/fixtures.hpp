#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "iaf/point_cloud.hpp"

namespace fixtures {

// Uniform random positions in [0, extent)^3.
iaf::RowMat3d random_positions(int n, std::uint64_t seed, double extent = 10.0);

// Regular unit-spacing grid in the z=0 plane, nx columns by ny rows,
// row-major point order (index = y * nx + x).
iaf::RowMat3d plane_grid(int nx, int ny);

// Randomized synthetic scene for oracle-equivalence checks: slab ground
// truth along x (spatially coherent classes) and predictions corrupted by
// point flips plus one wrong ball.
struct Scene {
    iaf::PointCloud cloud;
    Eigen::VectorXi pred;
};
Scene random_scene(int n, int classes, double flip_rate, std::uint64_t seed);

// Planted-error fixture: an 80 x 50 unit grid with a two-class interface.
// Three wrong structures with known membership: a 30-point isolated blob, a
// band straddling the class interface, and a solid region of 40% of the
// cloud. Designed for evaluation at K = 100.
struct PlantedFixture {
    iaf::PointCloud cloud;
    Eigen::VectorXi pred;
    std::vector<int> blob;    // expected mostly isolate-small
    std::vector<int> band;    // expected mostly complex-boundary
    std::vector<int> region;  // expected mostly confusing-interior
    int k = 100;              // evaluation K matched to the fixture density
};
PlantedFixture planted_fixture();

}  // namespace fixtures
