#include "iaf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace iaf::io {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) {
            ++pos;
        }
        size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') {
            ++pos;
        }
        if (pos > start) fields.push_back(line.substr(start, pos - start));
    }
    return fields;
}

double parse_double(std::string_view token, long line_no) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ValidationError("line " + std::to_string(line_no) + ": cannot parse number '" +
                              std::string(token) + "'");
    }
    if (!std::isfinite(value)) {
        throw ValidationError("line " + std::to_string(line_no) + ": non-finite value");
    }
    return value;
}

long parse_int(std::string_view token, long line_no) {
    long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ValidationError("line " + std::to_string(line_no) + ": cannot parse integer '" +
                              std::string(token) + "'");
    }
    return value;
}

}  // namespace

PointCloud load_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::vector<double> xyz;
    std::vector<std::uint8_t> rgb;
    std::vector<int> labels;
    int field_count = -1;
    long line_no = 0;

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) {
            throw ValidationError("line " + std::to_string(line_no) + ": empty line");
        }
        const int count = static_cast<int>(fields.size());
        if (count != 3 && count != 6 && count != 7) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 3, 6 or 7 fields, got " +
                                  std::to_string(count));
        }
        if (field_count == -1) {
            field_count = count;
        } else if (count != field_count) {
            throw ValidationError("line " + std::to_string(line_no) + ": has " +
                                  std::to_string(count) + " fields, first line has " +
                                  std::to_string(field_count));
        }
        for (int j = 0; j < 3; ++j) xyz.push_back(parse_double(fields[static_cast<size_t>(j)], line_no));
        if (count >= 6) {
            for (int j = 3; j < 6; ++j) {
                const long c = parse_int(fields[static_cast<size_t>(j)], line_no);
                if (c < 0 || c > 255) {
                    throw ValidationError("line " + std::to_string(line_no) + ": color " +
                                          std::to_string(c) + " outside [0, 255]");
                }
                rgb.push_back(static_cast<std::uint8_t>(c));
            }
        }
        if (count == 7) {
            const long label = parse_int(fields[6], line_no);
            if (label < 0) {
                throw ValidationError("line " + std::to_string(line_no) + ": negative label");
            }
            labels.push_back(static_cast<int>(label));
        }
    }
    if (line_no == 0 || xyz.empty()) {
        throw ValidationError("'" + path + "': file contains no points");
    }

    const int n = static_cast<int>(xyz.size() / 3);
    RowMat3d positions(n, 3);
    std::memcpy(positions.data(), xyz.data(), xyz.size() * sizeof(double));

    std::optional<RowMat3u8> colors;
    if (!rgb.empty()) {
        RowMat3u8 m(n, 3);
        std::memcpy(m.data(), rgb.data(), rgb.size());
        colors = std::move(m);
    }
    std::optional<Eigen::VectorXi> gt;
    if (!labels.empty()) {
        gt = Eigen::Map<Eigen::VectorXi>(labels.data(), n);
    }
    return PointCloud(std::move(positions), std::move(colors), std::move(gt));
}

Predictions load_predictions(const std::string& path, int expected_n, int class_count) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    Predictions preds;
    std::vector<int> labels;
    std::vector<double> probs;
    int field_count = -1;
    long line_no = 0;

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) {
            throw ValidationError("line " + std::to_string(line_no) + ": empty line");
        }
        const int count = static_cast<int>(fields.size());
        if (field_count == -1) {
            if (count != 1 && (class_count > 0 && count != class_count)) {
                throw ValidationError("line 1: expected 1 label or " +
                                      std::to_string(class_count) + " probabilities, got " +
                                      std::to_string(count) + " fields");
            }
            field_count = count;
        } else if (count != field_count) {
            throw ValidationError("line " + std::to_string(line_no) + ": has " +
                                  std::to_string(count) + " fields, first line has " +
                                  std::to_string(field_count));
        }
        if (field_count == 1) {
            const long label = parse_int(fields[0], line_no);
            if (label < 0 || (class_count > 0 && label >= class_count)) {
                throw ValidationError("line " + std::to_string(line_no) + ": label " +
                                      std::to_string(label) + " outside [0, " +
                                      std::to_string(class_count) + ")");
            }
            labels.push_back(static_cast<int>(label));
        } else {
            double sum = 0.0;
            const size_t row_start = probs.size();
            for (const auto& f : fields) {
                const double v = parse_double(f, line_no);
                probs.push_back(v);
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-4) {
                throw ValidationError("line " + std::to_string(line_no) + ": probability row sums to " +
                                      std::to_string(sum));
            }
            for (size_t j = row_start; j < probs.size(); ++j) probs[j] /= sum;
        }
    }

    const long rows = field_count == 1 ? static_cast<long>(labels.size())
                                       : static_cast<long>(probs.size()) / field_count;
    if (rows != expected_n) {
        throw ValidationError("'" + path + "': expected " + std::to_string(expected_n) +
                              " rows, got " + std::to_string(rows));
    }

    if (field_count == 1) {
        preds.has_probs = false;
        preds.labels = Eigen::Map<Eigen::VectorXi>(labels.data(), rows);
    } else {
        preds.has_probs = true;
        preds.probs = Eigen::Map<RowMatXd>(probs.data(), rows, field_count);
    }
    return preds;
}

RowMatXd load_matrix(const std::string& path, int expected_n) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::vector<double> values;
    int field_count = -1;
    long line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) {
            throw ValidationError("line " + std::to_string(line_no) + ": empty line");
        }
        if (field_count == -1) {
            field_count = static_cast<int>(fields.size());
        } else if (static_cast<int>(fields.size()) != field_count) {
            throw ValidationError("line " + std::to_string(line_no) + ": has " +
                                  std::to_string(fields.size()) + " fields, first line has " +
                                  std::to_string(field_count));
        }
        for (const auto& f : fields) values.push_back(parse_double(f, line_no));
    }
    if (line_no != expected_n) {
        throw ValidationError("'" + path + "': expected " + std::to_string(expected_n) +
                              " rows, got " + std::to_string(line_no));
    }
    return Eigen::Map<RowMatXd>(values.data(), line_no, field_count);
}

Eigen::VectorXi argmax_labels(const RowMatXd& probs) {
    Eigen::VectorXi labels(probs.rows());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        int best = 0;
        for (Eigen::Index c = 1; c < probs.cols(); ++c) {
            if (probs(i, c) > probs(i, best)) best = static_cast<int>(c);
        }
        labels(i) = best;
    }
    return labels;
}

void write_ply(const RowMat3d& positions, const RowMat3u8& colors, const std::string& path,
               PlyFormat format) {
    const Eigen::Index n = positions.rows();
    if (n < 1) throw ValidationError("write_ply: no points");
    if (colors.rows() != n) throw ValidationError("write_ply: color count mismatch");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    out << "ply\n";
    out << (format == PlyFormat::ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n");
    out << "element vertex " << n << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";

    if (format == PlyFormat::ascii) {
        out.precision(9);
        for (Eigen::Index i = 0; i < n; ++i) {
            out << static_cast<float>(positions(i, 0)) << ' ' << static_cast<float>(positions(i, 1))
                << ' ' << static_cast<float>(positions(i, 2)) << ' ' << int(colors(i, 0)) << ' '
                << int(colors(i, 1)) << ' ' << int(colors(i, 2)) << '\n';
        }
    } else {
        // Vertex record: 3 x float32 little-endian + 3 x uint8.
        for (Eigen::Index i = 0; i < n; ++i) {
            float xyz[3] = {static_cast<float>(positions(i, 0)), static_cast<float>(positions(i, 1)),
                            static_cast<float>(positions(i, 2))};
            out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
            std::uint8_t c[3] = {colors(i, 0), colors(i, 1), colors(i, 2)};
            out.write(reinterpret_cast<const char*>(c), sizeof(c));
        }
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string report_to_json(const IpbmReport& report) {
    nlohmann::ordered_json doc;
    doc["config"] = {{"k", report.config.k},
                     {"zeta1", report.config.zeta1},
                     {"zeta2", report.config.zeta2},
                     {"rho", report.config.rho},
                     {"epsilon", report.config.epsilon}};
    doc["subsets"] = nlohmann::ordered_json::array();
    for (const SubsetResult& s : report.subsets) {
        doc["subsets"].push_back({{"name", s.name},
                                  {"n", s.n()},
                                  {"s1", s.s1},
                                  {"s2", s.s2},
                                  {"s3", s.s3},
                                  {"isa", s.isa()},
                                  {"cba", s.cba()},
                                  {"cia", s.cia()}});
    }
    return doc.dump(2) + "\n";
}

void write_report(const IpbmReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << report_to_json(report);
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace iaf::io
