#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace edgelab {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Numerical procedure failed to meet its own accuracy contract.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Leading data or a realized operator is (near) degenerate.
class DegenerateError : public std::runtime_error {
public:
    DegenerateError(const std::string& what, double measure)
        : std::runtime_error(what), measure_(measure) {}
    double measure() const { return measure_; }

private:
    double measure_;
};

inline int sgn(int l) { return l >= 0 ? 1 : -1; }
inline double sgn(double x) { return x >= 0.0 ? 1.0 : -1.0; }

}  // namespace edgelab
