#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hetnet {

using NodeId = int;
using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

// All library failures surface as hetnet::Error (or a subclass) with a
// human-readable message.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a decision or route breaks the loop-free / resource-alternation
// constraints. Indicates a policy bug, not a recoverable condition.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

} // namespace hetnet
