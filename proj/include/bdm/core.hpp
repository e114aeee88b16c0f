#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bdm {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDefaultTol = 1e-10;
inline constexpr cplx kI{0.0, 1.0};

// Square root on the branch Im(sqrt z) >= 0; nonnegative root for z >= 0.
[[nodiscard]] inline cplx sqrt_branch(cplx z)
{
    cplx w = std::sqrt(z);
    if (w.imag() < 0.0 || (w.imag() == 0.0 && w.real() < 0.0)) {
        w = -w;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Errors. Callers (notably the CLI) distinguish input problems from numerical
// failures through the two intermediate bases.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class DomainError : public InputError {
public:
    using InputError::InputError;
};

class UnsupportedError : public InputError {
public:
    using InputError::InputError;
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

class EigenvalueHit : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Raised when one of the auxiliary operators H_{theta0,0} or H_{0,thetaR}
// has an eigenvalue at z, so the normalized basis u- / u+ does not exist.
class NearEigenvalue : public EigenvalueHit {
public:
    enum class Operator { LeftRobinRightDirichlet, LeftDirichletRightRobin };
    NearEigenvalue(Operator which, const std::string& msg) : EigenvalueHit(msg), which_(which) {}
    [[nodiscard]] Operator which() const noexcept { return which_; }

private:
    Operator which_;
};

class StiffnessError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IntegrationAccuracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SearchFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ContourHit : public NumericalError {
public:
    ContourHit(double suggested_inflation, const std::string& msg)
        : NumericalError(msg), inflation_(suggested_inflation) {}
    [[nodiscard]] double suggested_inflation() const noexcept { return inflation_; }

private:
    double inflation_;
};

class SingularDenominator : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AccuracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------
// 2x2 complex matrices, row-major, zero-based indices.

struct Mat2 {
    std::array<cplx, 4> e{};

    Mat2() = default;
    Mat2(cplx a11, cplx a12, cplx a21, cplx a22) : e{a11, a12, a21, a22} {}

    [[nodiscard]] cplx& operator()(int i, int j) { return e[static_cast<std::size_t>(2 * i + j)]; }
    [[nodiscard]] const cplx& operator()(int i, int j) const { return e[static_cast<std::size_t>(2 * i + j)]; }

    [[nodiscard]] static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    [[nodiscard]] static Mat2 zero() { return {}; }
    [[nodiscard]] static Mat2 diag(cplx a, cplx b) { return {a, 0.0, 0.0, b}; }

    [[nodiscard]] cplx det() const { return e[0] * e[3] - e[1] * e[2]; }
    [[nodiscard]] cplx trace() const { return e[0] + e[3]; }
    [[nodiscard]] Mat2 adjoint() const
    {
        return {std::conj(e[0]), std::conj(e[2]), std::conj(e[1]), std::conj(e[3])};
    }
    [[nodiscard]] Mat2 transpose() const { return {e[0], e[2], e[1], e[3]}; }
};

[[nodiscard]] inline Mat2 operator+(const Mat2& a, const Mat2& b)
{
    return {a.e[0] + b.e[0], a.e[1] + b.e[1], a.e[2] + b.e[2], a.e[3] + b.e[3]};
}

[[nodiscard]] inline Mat2 operator-(const Mat2& a, const Mat2& b)
{
    return {a.e[0] - b.e[0], a.e[1] - b.e[1], a.e[2] - b.e[2], a.e[3] - b.e[3]};
}

[[nodiscard]] inline Mat2 operator-(const Mat2& a) { return {-a.e[0], -a.e[1], -a.e[2], -a.e[3]}; }

[[nodiscard]] inline Mat2 operator*(const Mat2& a, const Mat2& b)
{
    return {a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
            a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]};
}

[[nodiscard]] inline Mat2 operator*(cplx s, const Mat2& a) { return {s * a.e[0], s * a.e[1], s * a.e[2], s * a.e[3]}; }
[[nodiscard]] inline Mat2 operator*(const Mat2& a, cplx s) { return s * a; }

[[nodiscard]] inline std::array<cplx, 2> operator*(const Mat2& a, const std::array<cplx, 2>& v)
{
    return {a.e[0] * v[0] + a.e[1] * v[1], a.e[2] * v[0] + a.e[3] * v[1]};
}

// Largest entry modulus.
[[nodiscard]] inline double max_abs(const Mat2& a)
{
    double m = 0.0;
    for (const auto& x : a.e) m = std::max(m, std::abs(x));
    return m;
}

// Induced 1-norm.
[[nodiscard]] inline double norm1(const Mat2& a)
{
    return std::max(std::abs(a.e[0]) + std::abs(a.e[2]), std::abs(a.e[1]) + std::abs(a.e[3]));
}

// Plain inverse; throws only for an exactly singular or non-finite result.
[[nodiscard]] inline Mat2 inverse(const Mat2& a)
{
    const cplx d = a.det();
    if (d == cplx(0.0) || !std::isfinite(std::abs(d))) {
        throw SingularDenominator("2x2 matrix is singular");
    }
    return {a.e[3] / d, -a.e[1] / d, -a.e[2] / d, a.e[0] / d};
}

[[nodiscard]] inline double condition_number(const Mat2& a)
{
    const cplx d = a.det();
    if (d == cplx(0.0)) return std::numeric_limits<double>::infinity();
    const Mat2 adj{a.e[3], -a.e[1], -a.e[2], a.e[0]};
    return norm1(a) * norm1(adj) / std::abs(d);
}

// Inverse with the 1-norm condition-number guard used by the LFT layer.
[[nodiscard]] inline Mat2 inverse_guarded(const Mat2& a, double max_cond = 1e8)
{
    const double c = condition_number(a);
    if (!(c <= max_cond)) {
        throw SingularDenominator("2x2 inversion rejected: condition number " + std::to_string(c));
    }
    return inverse(a);
}

// (M - M^*) / (2i), a Hermitian matrix.
[[nodiscard]] inline Mat2 imag_part(const Mat2& m)
{
    const Mat2 d = m - m.adjoint();
    return cplx(0.0, -0.5) * d;
}

// Eigenvalues (ascending) of a Hermitian 2x2 matrix; the imaginary parts of the
// diagonal are ignored.
[[nodiscard]] inline std::array<double, 2> hermitian_eigenvalues(const Mat2& h)
{
    const double a = h.e[0].real();
    const double d = h.e[3].real();
    const cplx b = 0.5 * (h.e[1] + std::conj(h.e[2]));
    const double mean = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), std::abs(b));
    return {mean - rad, mean + rad};
}

}  // namespace bdm
