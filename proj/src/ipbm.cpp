#include "iaf/ipbm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

namespace iaf {

void validate(const IpbmConfig& config) {
    if (config.k < 1) throw ParameterError("ipbm: K must be >= 1");
    if (!(config.zeta1 > 0.0 && config.zeta1 < config.zeta2 && config.zeta2 < 1.0)) {
        throw ParameterError("ipbm: need 0 < zeta1 < zeta2 < 1");
    }
    if (!(config.rho > 0.0 && config.rho <= 1.0)) {
        throw ParameterError("ipbm: rho must lie in (0, 1]");
    }
    if (!(config.epsilon > 0.0 && config.epsilon <= 1.0)) {
        throw ParameterError("ipbm: epsilon must lie in (0, 1]");
    }
}

std::vector<char> misclassification_mask(const Eigen::VectorXi& pred_labels,
                                         const Eigen::VectorXi& gt_labels) {
    if (pred_labels.size() != gt_labels.size()) {
        throw ValidationError("mask: prediction count " + std::to_string(pred_labels.size()) +
                              " does not match ground-truth count " +
                              std::to_string(gt_labels.size()));
    }
    std::vector<char> mask(static_cast<size_t>(pred_labels.size()));
    for (Eigen::Index i = 0; i < pred_labels.size(); ++i) {
        if (pred_labels(i) < 0 || gt_labels(i) < 0) {
            throw ValidationError("mask: negative label at point " + std::to_string(i));
        }
        mask[static_cast<size_t>(i)] = pred_labels(i) != gt_labels(i);
    }
    return mask;
}

std::vector<double> neighborhood_error_fraction(const std::vector<char>& mask,
                                                const NeighborList& neighbors) {
    if (static_cast<int>(mask.size()) != neighbors.n()) {
        throw ValidationError("error fraction: mask size does not match neighbor table");
    }
    if (neighbors.self_inclusive) {
        throw ParameterError("error fraction: neighbors must exclude the point itself");
    }
    const int n = neighbors.n();
    const int k = neighbors.k();
    std::vector<double> fractions(static_cast<size_t>(n), -1.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        if (!mask[static_cast<size_t>(i)]) continue;
        int wrong = 0;
        for (int j = 0; j < k; ++j) {
            wrong += mask[static_cast<size_t>(neighbors.indices(i, j))];
        }
        fractions[static_cast<size_t>(i)] = static_cast<double>(wrong) / static_cast<double>(k);
    }
    return fractions;
}

AreaTag classify_fraction(double fraction, double zeta1, double zeta2) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw ParameterError("classify_fraction: fraction outside [0, 1]");
    }
    if (fraction < zeta1) return AreaTag::isolate_small;
    if (fraction < zeta2) return AreaTag::complex_boundary;
    return AreaTag::confusing_interior;
}

PartitionCounts partition(const std::vector<double>& fractions, double zeta1, double zeta2) {
    PartitionCounts counts;
    for (double f : fractions) {
        switch (classify_fraction(f, zeta1, zeta2)) {
            case AreaTag::isolate_small: ++counts.s1; break;
            case AreaTag::complex_boundary: ++counts.s2; break;
            case AreaTag::confusing_interior: ++counts.s3; break;
            case AreaTag::correct: break;
        }
    }
    return counts;
}

namespace {

// Low-level property rows: coordinates, plus colors when available.
RowMatXd low_level_props(const PointCloud& cloud) {
    if (!cloud.has_colors()) return cloud.positions();
    RowMatXd props(cloud.size(), 6);
    props.leftCols<3>() = cloud.positions();
    props.rightCols<3>() = cloud.colors().cast<double>();
    return props;
}

// Scalar-loop property distance; deliberately plain so it rounds the same
// way as the brute-force references.
double prop_distance(const RowMatXd& props, int a, int b) {
    double sq = 0.0;
    for (Eigen::Index d = 0; d < props.cols(); ++d) {
        const double diff = props(a, d) - props(b, d);
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

// Top floor(epsilon * n) indices by descending value, ties ascending index,
// returned sorted ascending.
std::vector<int> top_fraction(const Eigen::VectorXd& value, double epsilon) {
    const int n = static_cast<int>(value.size());
    const int m = static_cast<int>(std::floor(epsilon * static_cast<double>(n)));
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + m, order.end(), [&](int a, int b) {
        return value(a) > value(b) || (value(a) == value(b) && a < b);
    });
    order.resize(static_cast<size_t>(m));
    std::sort(order.begin(), order.end());
    return order;
}

void check_full_cloud_k(const PointCloud& cloud, const IpbmConfig& config,
                        const std::string& what) {
    if (config.k > cloud.size() - 1) {
        throw ParameterError("ipbm: " + what + " needs at least K+1 = " +
                             std::to_string(config.k + 1) + " points, cloud has " +
                             std::to_string(cloud.size()));
    }
}

// Evaluation of one subset against its own K neighborhoods.
SubsetResult evaluate_subset(const PointCloud& cloud, const Eigen::VectorXi& pred,
                             const IpbmConfig& config, std::string name,
                             std::vector<int> indices) {
    const int m = static_cast<int>(indices.size());
    if (m < config.k + 1) {
        throw ParameterError("ipbm: subset '" + name + "' has " + std::to_string(m) +
                             " points, evaluation needs at least K+1 = " +
                             std::to_string(config.k + 1));
    }

    RowMat3d sub_pts(m, 3);
    std::vector<char> sub_mask(static_cast<size_t>(m));
    const Eigen::VectorXi& gt = cloud.gt_labels();
    for (int i = 0; i < m; ++i) {
        const int src = indices[static_cast<size_t>(i)];
        sub_pts.row(i) = cloud.positions().row(src);
        sub_mask[static_cast<size_t>(i)] = pred(src) != gt(src);
    }

    SubsetResult result;
    result.name = std::move(name);
    result.indices = std::move(indices);
    result.tags.assign(static_cast<size_t>(m), AreaTag::correct);

    const KdTree3 tree = KdTree3::build(sub_pts);
    std::atomic<long> s1{0}, s2{0}, s3{0};
    stream_knn(
        tree, config.k, /*self_inclusive=*/false,
        [&](int i, const Neighbor* row, int kk) {
            if (!sub_mask[static_cast<size_t>(i)]) return;
            int wrong = 0;
            for (int j = 0; j < kk; ++j) {
                wrong += sub_mask[static_cast<size_t>(row[j].idx)];
            }
            const double fraction = static_cast<double>(wrong) / static_cast<double>(kk);
            const AreaTag tag = classify_fraction(fraction, config.zeta1, config.zeta2);
            result.tags[static_cast<size_t>(i)] = tag;
            switch (tag) {
                case AreaTag::isolate_small: ++s1; break;
                case AreaTag::complex_boundary: ++s2; break;
                case AreaTag::confusing_interior: ++s3; break;
                case AreaTag::correct: break;
            }
        },
        /*sorted=*/false);
    result.s1 = s1.load();
    result.s2 = s2.load();
    result.s3 = s3.load();
    return result;
}

}  // namespace

std::vector<int> category_boundary_subset(const PointCloud& cloud, const IpbmConfig& config) {
    validate(config);
    if (!cloud.has_labels()) {
        throw ConfigError("category-boundary subset: ground-truth labels required");
    }
    check_full_cloud_k(cloud, config, "category-boundary subset");
    const int n = cloud.size();
    const Eigen::VectorXi& gt = cloud.gt_labels();
    const double threshold = config.rho * static_cast<double>(config.k);

    std::vector<char> keep(static_cast<size_t>(n), 0);
    const KdTree3 tree = build_spatial_index(cloud);
    stream_knn(
        tree, config.k, /*self_inclusive=*/false,
        [&](int i, const Neighbor* row, int kk) {
            int differing = 0;
            for (int j = 0; j < kk; ++j) differing += gt(row[j].idx) != gt(i);
            keep[static_cast<size_t>(i)] = static_cast<double>(differing) >= threshold;
        },
        /*sorted=*/false);

    std::vector<int> subset;
    for (int i = 0; i < n; ++i) {
        if (keep[static_cast<size_t>(i)]) subset.push_back(i);
    }
    return subset;
}

std::vector<int> geometry_boundary_subset(const PointCloud& cloud, const IpbmConfig& config) {
    validate(config);
    check_full_cloud_k(cloud, config, "geometry-boundary subset");
    const int n = cloud.size();
    const RowMatXd props = low_level_props(cloud);

    // LD over the K sorted neighbors; the fixed order keeps the sum, and so
    // the ranking, reproducible.
    Eigen::VectorXd ld1(n);
    const KdTree3 tree = build_spatial_index(cloud);
    stream_knn(tree, config.k, /*self_inclusive=*/false, [&](int i, const Neighbor* row, int kk) {
        double sum = 0.0;
        for (int j = 0; j < kk; ++j) sum += prop_distance(props, i, row[j].idx);
        ld1(i) = sum;
    });
    return top_fraction(ld1, config.epsilon);
}

IpbmReport evaluate_ipbm(const PointCloud& cloud, const Eigen::VectorXi& pred_labels,
                         const IpbmConfig& config, const std::vector<std::string>& subsets) {
    validate(config);
    if (!cloud.has_labels()) {
        throw ConfigError("ipbm: ground-truth labels required");
    }
    if (pred_labels.size() != cloud.size()) {
        throw ValidationError("ipbm: prediction count " + std::to_string(pred_labels.size()) +
                              " does not match cloud size " + std::to_string(cloud.size()));
    }
    for (Eigen::Index i = 0; i < pred_labels.size(); ++i) {
        if (pred_labels(i) < 0) {
            throw ValidationError("ipbm: negative predicted label at point " + std::to_string(i));
        }
    }

    bool want_original = false, want_category = false, want_geometry = false;
    for (const std::string& name : subsets) {
        if (name == "original") want_original = true;
        else if (name == "category-boundary") want_category = true;
        else if (name == "geometry-boundary") want_geometry = true;
        else throw ParameterError("ipbm: unknown subset '" + name + "'");
    }

    const int n = cloud.size();
    if (want_original && n < config.k + 1) {
        throw ParameterError("ipbm: subset 'original' has " + std::to_string(n) +
                             " points, evaluation needs at least K+1 = " +
                             std::to_string(config.k + 1));
    }
    if (want_category && !cloud.has_labels()) {
        throw ConfigError("category-boundary subset: ground-truth labels required");
    }
    if (want_category || want_geometry) {
        check_full_cloud_k(cloud, config,
                           want_category ? "category-boundary subset" : "geometry-boundary subset");
    }

    // One pass over the full cloud covers the original-subset fractions, the
    // category-boundary counts and the geometry-boundary ranking.
    const Eigen::VectorXi& gt = cloud.gt_labels();
    std::vector<char> mask = misclassification_mask(pred_labels, gt);
    std::vector<AreaTag> original_tags(static_cast<size_t>(n), AreaTag::correct);
    PartitionCounts original_counts;
    std::vector<char> category_keep(want_category ? static_cast<size_t>(n) : 0, 0);
    Eigen::VectorXd ld1(want_geometry ? n : 0);
    const RowMatXd props = want_geometry ? low_level_props(cloud) : RowMatXd();
    const double category_threshold = config.rho * static_cast<double>(config.k);

    {
        const KdTree3 tree = build_spatial_index(cloud);
        std::atomic<long> s1{0}, s2{0}, s3{0};
        stream_knn(
            tree, config.k, /*self_inclusive=*/false,
            [&](int i, const Neighbor* row, int kk) {
                if (want_original && mask[static_cast<size_t>(i)]) {
                    int wrong = 0;
                    for (int j = 0; j < kk; ++j) wrong += mask[static_cast<size_t>(row[j].idx)];
                    const double fraction =
                        static_cast<double>(wrong) / static_cast<double>(kk);
                    const AreaTag tag = classify_fraction(fraction, config.zeta1, config.zeta2);
                    original_tags[static_cast<size_t>(i)] = tag;
                    if (tag == AreaTag::isolate_small) ++s1;
                    if (tag == AreaTag::complex_boundary) ++s2;
                    if (tag == AreaTag::confusing_interior) ++s3;
                }
                if (want_category) {
                    int differing = 0;
                    for (int j = 0; j < kk; ++j) differing += gt(row[j].idx) != gt(i);
                    category_keep[static_cast<size_t>(i)] =
                        static_cast<double>(differing) >= category_threshold;
                }
                if (want_geometry) {
                    double sum = 0.0;
                    for (int j = 0; j < kk; ++j) sum += prop_distance(props, i, row[j].idx);
                    ld1(i) = sum;
                }
            },
            /*sorted=*/want_geometry);
        original_counts = PartitionCounts{s1.load(), s2.load(), s3.load()};
    }

    IpbmReport report;
    report.config = config;
    for (const std::string& name : subsets) {
        if (name == "original") {
            SubsetResult result;
            result.name = name;
            result.indices.resize(static_cast<size_t>(n));
            std::iota(result.indices.begin(), result.indices.end(), 0);
            result.tags = original_tags;
            result.s1 = original_counts.s1;
            result.s2 = original_counts.s2;
            result.s3 = original_counts.s3;
            report.subsets.push_back(std::move(result));
        } else if (name == "category-boundary") {
            std::vector<int> indices;
            for (int i = 0; i < n; ++i) {
                if (category_keep[static_cast<size_t>(i)]) indices.push_back(i);
            }
            report.subsets.push_back(
                evaluate_subset(cloud, pred_labels, config, name, std::move(indices)));
        } else {
            report.subsets.push_back(evaluate_subset(cloud, pred_labels, config, name,
                                                     top_fraction(ld1, config.epsilon)));
        }
    }
    return report;
}

RowMat3u8 colorize_areas(const SubsetResult& subset, const PointCloud& cloud) {
    if (subset.indices.size() != subset.tags.size()) {
        throw ValidationError("colorize: subset tags do not match subset indices");
    }
    RowMat3u8 colors(cloud.size(), 3);
    colors.setConstant(255);  // background and correct points stay white
    for (size_t j = 0; j < subset.indices.size(); ++j) {
        const int i = subset.indices[j];
        if (i < 0 || i >= cloud.size()) {
            throw ValidationError("colorize: subset index out of range");
        }
        switch (subset.tags[j]) {
            case AreaTag::correct: break;
            case AreaTag::isolate_small:
                colors.row(i) << 255, 255, 0;  // yellow
                break;
            case AreaTag::complex_boundary:
                colors.row(i) << 255, 165, 0;  // orange
                break;
            case AreaTag::confusing_interior:
                colors.row(i) << 0, 255, 255;  // cyan
                break;
        }
    }
    return colors;
}

}  // namespace iaf
