#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace iaf {

// Error taxonomy. The CLI maps all of these to exit code 2 (bad input or
// configuration); any other exception is a computation error, exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : Error {   // malformed or inconsistent input data
    using Error::Error;
};
struct ParameterError : Error {    // argument out of its documented range
    using Error::Error;
};
struct ConfigError : Error {       // requested configuration cannot be honored
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

using RowMat3d  = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using RowMatXd  = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatXf  = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMat3u8 = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;
using RowMatXi  = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Shared by the spatial index and the brute-force reference so both sides
// evaluate exactly the same floating-point expression.
inline double squared_dist3(const double* a, const double* b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace iaf
