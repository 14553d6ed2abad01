#pragma once

#include <array>
#include <vector>

#include "iaf/neighbors.hpp"
#include "iaf/point_cloud.hpp"

namespace iaf {

// Property channels entering the geometric local difference.
enum class Ld1Channels { xyz, xyzrgb };

struct MiningConfig {
    std::array<double, 3> mu{0.0, 0.0, 1.0};  // weights for LD1, LD2, LD3
    double tau = 4.0;                         // selects floor(N / tau) points
    int k = 16;                               // neighborhood size
    Ld1Channels ld1_channels = Ld1Channels::xyz;
};

// Per-point sums of L2 distances to the K neighbors, each in its own
// representation. Neighbors must be Euclidean and self-excluded.
Eigen::VectorXd ld_geometry(const PointCloud& cloud, const NeighborList& neighbors,
                            Ld1Channels channels = Ld1Channels::xyz);
Eigen::VectorXd ld_geometry(const RowMatXd& properties, const NeighborList& neighbors);
Eigen::VectorXd ld_semantic(const RowMatXd& probs, const NeighborList& neighbors);
Eigen::VectorXd ld_feature(const RowMatXd& features, const NeighborList& neighbors);

// Min-max normalizes each raw column over all points (a degenerate column
// contributes 0), then sums with the mu weights.
Eigen::VectorXd accumulate_ld(const RowMatXd& ld_raw, const std::array<double, 3>& mu);

// Indices of the floor(N / tau) largest values, descending, ties by
// ascending index.
std::vector<int> select_indistinguishable(const Eigen::VectorXd& ld, double tau);

struct MiningResult {
    RowMatXd ld_raw;                 // N x 3: LD1, LD2, LD3
    Eigen::VectorXd ld_accumulated;  // N
    std::vector<int> selected;       // floor(N / tau) indices
};

// Full mining pass over a cloud with optional prediction/feature snapshots.
// A missing snapshot whose mu weight is zero yields a zero column; a missing
// snapshot with positive weight is a configuration error.
MiningResult mine(const PointCloud& cloud, const RowMatXd* probs, const RowMatXd* features,
                  const MiningConfig& config);

}  // namespace iaf
