#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace lsldg {

// Sample and center matrices are row-major: the kernels layer consumes
// points one contiguous row at a time.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Error raised while computing (singular systems, degenerate inputs, ...).
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw error(msg);
}

}  // namespace lsldg
