#pragma once

#include <string>
#include <vector>

#include "iaf/mining.hpp"
#include "iaf/neighbors.hpp"
#include "iaf/point_cloud.hpp"

namespace iaf {

struct IpbmConfig {
    int k = 500;           // evaluation neighborhood size
    double zeta1 = 0.33;   // interval split [0, z1) / [z1, z2) / [z2, 1]
    double zeta2 = 0.66;
    double rho = 0.002;    // category-boundary threshold: r_i >= rho * K
    double epsilon = 0.25; // geometry-boundary subset keeps top floor(eps * N)
};

enum class AreaTag : std::uint8_t {
    correct = 0,
    isolate_small = 1,      // error fraction in [0, zeta1)
    complex_boundary = 2,   // error fraction in [zeta1, zeta2)
    confusing_interior = 3, // error fraction in [zeta2, 1]
};

struct PartitionCounts {
    long s1 = 0, s2 = 0, s3 = 0;
};

// One evaluated subset: the points it covers, the S1/S2/S3 split of its
// misclassified points, and a per-point area tag aligned with `indices`.
struct SubsetResult {
    std::string name;
    std::vector<int> indices;  // into the original cloud
    long s1 = 0, s2 = 0, s3 = 0;
    std::vector<AreaTag> tags;

    long n() const { return static_cast<long>(indices.size()); }
    double isa() const { return static_cast<double>(s1) / static_cast<double>(n()); }
    double cba() const { return static_cast<double>(s2) / static_cast<double>(n()); }
    double cia() const { return static_cast<double>(s3) / static_cast<double>(n()); }
};

struct IpbmReport {
    IpbmConfig config;
    std::vector<SubsetResult> subsets;
};

// True where prediction and ground truth disagree.
std::vector<char> misclassification_mask(const Eigen::VectorXi& pred_labels,
                                         const Eigen::VectorXi& gt_labels);

// m_i / K for each misclassified point; -1 marks correct points. Neighbors
// must be Euclidean and self-excluded.
std::vector<double> neighborhood_error_fraction(const std::vector<char>& mask,
                                                const NeighborList& neighbors);

// Interval assignment for one fraction: [0,z1) -> S1, [z1,z2) -> S2,
// [z2,1] -> S3.
AreaTag classify_fraction(double fraction, double zeta1, double zeta2);

// Counts over a set of fractions (each must lie in [0, 1]).
PartitionCounts partition(const std::vector<double>& fractions, double zeta1, double zeta2);

// Points whose ground-truth label differs from at least rho*K of their K
// full-cloud neighbors' labels.
std::vector<int> category_boundary_subset(const PointCloud& cloud, const IpbmConfig& config);

// Top floor(epsilon * N) points by geometric local difference over low-level
// properties (xyz plus colors when the cloud has them).
std::vector<int> geometry_boundary_subset(const PointCloud& cloud, const IpbmConfig& config);

// Full evaluation: for each named subset ("original", "category-boundary",
// "geometry-boundary") restrict the cloud, recompute K neighborhoods within
// the subset, and partition the misclassified points.
IpbmReport evaluate_ipbm(const PointCloud& cloud, const Eigen::VectorXi& pred_labels,
                         const IpbmConfig& config, const std::vector<std::string>& subsets);

// Area colors over the whole cloud: yellow = isolate-small, orange =
// complex-boundary, cyan = confusing-interior, white = correct and points
// outside the subset.
RowMat3u8 colorize_areas(const SubsetResult& subset, const PointCloud& cloud);

void validate(const IpbmConfig& config);

}  // namespace iaf
