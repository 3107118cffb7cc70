#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace twoatom {

using Complex = std::complex<double>;

inline constexpr int kDim = 9;

using Matrix9c = Eigen::Matrix<Complex, kDim, kDim>;
using Matrix9d = Eigen::Matrix<double, kDim, kDim>;
using Vector9c = Eigen::Matrix<Complex, kDim, 1>;

// Frozen basis ordering shared by every module, fixture and dump.
enum class Dicke : int { g = 0, s12, a12, s13, a13, s23, a23, e2, e3 };

inline constexpr int idx(Dicke s) { return static_cast<int>(s); }

inline constexpr const char* dicke_name(Dicke s) {
    constexpr const char* names[kDim] = {"g",   "s12", "a12", "s13", "a13",
                                         "s23", "a23", "e2",  "e3"};
    return names[idx(s)];
}

// Error hierarchy. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input (negative distance, thresholds out of order, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Parameters valid in principle but outside the region where a method applies.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// A closed-form rate expression hit its denominator zero.
class PoleError : public RegimeError {
public:
    using RegimeError::RegimeError;
};

/// Integration, kernel projection or linear solve failed its own check.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace twoatom
