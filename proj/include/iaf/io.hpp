#pragma once

#include <string>

#include "iaf/ipbm.hpp"
#include "iaf/point_cloud.hpp"

namespace iaf::io {

// Whitespace-delimited text, one point per line: "x y z [r g b] [label]"
// (3, 6, or 7 fields, identical on every line). Colors are integers in
// [0, 255], labels non-negative integers.
PointCloud load_cloud(const std::string& path);

// Either one integer label per line, or one row of C probabilities per line
// (rows must sum to 1 within 1e-4 and are renormalized exactly).
struct Predictions {
    bool has_probs = false;
    Eigen::VectorXi labels;  // valid when !has_probs
    RowMatXd probs;          // valid when has_probs
};

Predictions load_predictions(const std::string& path, int expected_n, int class_count);

// Generic whitespace-delimited numeric table with a uniform column count
// (feature snapshots for mining).
RowMatXd load_matrix(const std::string& path, int expected_n);

// argmax per row, ties to the lowest class index.
Eigen::VectorXi argmax_labels(const RowMatXd& probs);

enum class PlyFormat { ascii, binary_little_endian };

// Vertices with 32-bit float x,y,z and 8-bit red,green,blue.
void write_ply(const RowMat3d& positions, const RowMat3u8& colors, const std::string& path,
               PlyFormat format);

std::string report_to_json(const IpbmReport& report);
void write_report(const IpbmReport& report, const std::string& path);

}  // namespace iaf::io
