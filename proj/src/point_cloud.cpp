#include "iaf/point_cloud.hpp"

#include <cmath>

namespace iaf {

PointCloud::PointCloud(RowMat3d positions, std::optional<RowMat3u8> colors,
                       std::optional<Eigen::VectorXi> gt_labels, int class_count)
    : positions_(std::move(positions)),
      colors_(std::move(colors)),
      gt_labels_(std::move(gt_labels)),
      class_count_(class_count) {
    const Eigen::Index n = positions_.rows();
    if (n < 1) {
        throw ValidationError("point cloud must contain at least one point");
    }
    if (!positions_.allFinite()) {
        throw ValidationError("point cloud contains a non-finite coordinate");
    }
    if (colors_ && colors_->rows() != n) {
        throw ValidationError("color count does not match point count");
    }
    if (gt_labels_) {
        if (gt_labels_->size() != n) {
            throw ValidationError("label count does not match point count");
        }
        int max_label = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int label = (*gt_labels_)(i);
            if (label < 0) {
                throw ValidationError("ground-truth label is negative at point " +
                                      std::to_string(i));
            }
            max_label = std::max(max_label, label);
        }
        if (class_count_ <= 0) {
            class_count_ = max_label + 1;
        } else if (max_label >= class_count_) {
            throw ValidationError("ground-truth label " + std::to_string(max_label) +
                                  " outside [0, " + std::to_string(class_count_) + ")");
        }
    }
}

const RowMat3u8& PointCloud::colors() const {
    if (!colors_) throw ConfigError("point cloud has no colors");
    return *colors_;
}

const Eigen::VectorXi& PointCloud::gt_labels() const {
    if (!gt_labels_) throw ConfigError("point cloud has no ground-truth labels");
    return *gt_labels_;
}

}  // namespace iaf
