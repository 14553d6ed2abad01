#pragma once

#include <optional>

#include "iaf/common.hpp"

namespace iaf {

// Immutable point set: positions in meters plus optional per-point colors and
// ground-truth labels. Coordinates are kept at 64-bit precision so every
// metric result can be compared exactly against a brute-force reference.
class PointCloud {
public:
    explicit PointCloud(RowMat3d positions,
                        std::optional<RowMat3u8> colors = std::nullopt,
                        std::optional<Eigen::VectorXi> gt_labels = std::nullopt,
                        int class_count = 0);

    int size() const { return static_cast<int>(positions_.rows()); }
    const RowMat3d& positions() const { return positions_; }

    bool has_colors() const { return colors_.has_value(); }
    const RowMat3u8& colors() const;

    bool has_labels() const { return gt_labels_.has_value(); }
    const Eigen::VectorXi& gt_labels() const;

    // Number of classes C; labels, when present, all lie in [0, C).
    int class_count() const { return class_count_; }

private:
    RowMat3d positions_;
    std::optional<RowMat3u8> colors_;
    std::optional<Eigen::VectorXi> gt_labels_;
    int class_count_ = 0;
};

}  // namespace iaf
