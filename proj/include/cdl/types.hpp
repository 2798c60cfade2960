#pragma once

#include <Eigen/Dense>

#include <sstream>
#include <stdexcept>
#include <string>

namespace cdl {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible matrix shapes, or operations on an unfitted model.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid scalar arguments, labels out of range, malformed indicators.
class ValueError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient normal equations that cannot be solved as requested.
class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// Broken datasets, manifests, or matrix files.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invariant violations that signal an implementation bug, not a data condition.
class InternalError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline std::string shape_of(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

inline void ensure_nonempty(const Matrix& m, const std::string& name,
                            const std::string& context) {
    if (m.rows() < 1 || m.cols() < 1) {
        throw DimensionError(context + ": " + name + " is empty (" + shape_of(m) + ")");
    }
}

inline void ensure_finite(const Matrix& m, const std::string& name,
                          const std::string& context) {
    if (!m.allFinite()) {
        throw ValueError(context + ": " + name + " contains non-finite entries");
    }
}

inline void ensure_same(Index a, Index b, const std::string& what_a,
                        const std::string& what_b, const std::string& context) {
    if (a != b) {
        std::ostringstream os;
        os << context << ": " << what_a << " (" << a << ") does not match "
           << what_b << " (" << b << ")";
        throw DimensionError(os.str());
    }
}

}  // namespace detail

}  // namespace cdl
