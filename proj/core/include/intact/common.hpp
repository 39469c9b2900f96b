#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace intact {

// Dense f64 matrix. Row vectors are [1 x n]; batches are [B x d], one row
// per sample.
using Mat = Eigen::MatrixXd;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

inline std::string shape_str(const Mat& m) { return shape_str(m.rows(), m.cols()); }

}  // namespace intact
