#include "bdm/traces.hpp"

namespace bdm {

cplx normalize_strip(cplx theta)
{
    constexpr double two_pi = 2.0 * kPi;
    double re = std::fmod(theta.real(), two_pi);
    if (re < 0.0) re += two_pi;
    if (re >= two_pi) re -= two_pi;
    // Values within rounding of 2*pi fold back to 0.
    if (two_pi - re < 1e-15) re = 0.0;
    return {re, theta.imag()};
}

std::array<cplx, 2> trace_gamma(const AnglePair& pair, const BoundaryValues& b)
{
    return {std::cos(pair.theta0) * b.u0 + std::sin(pair.theta0) * b.du0,
            std::cos(pair.thetaR) * b.uR - std::sin(pair.thetaR) * b.duR};
}

Mat2 diag_sin(cplx a, cplx b) { return Mat2::diag(std::sin(a), std::sin(b)); }

Mat2 diag_cos(cplx a, cplx b) { return Mat2::diag(std::cos(a), std::cos(b)); }

Mat2 diag_sin(const AngleQuad& q)
{
    return diag_sin(q.primed.theta0 - q.base.theta0, q.primed.thetaR - q.base.thetaR);
}

Mat2 diag_cos(const AngleQuad& q)
{
    return diag_cos(q.primed.theta0 - q.base.theta0, q.primed.thetaR - q.base.thetaR);
}

bool is_dirichlet_angle(cplx theta) { return std::abs(std::sin(theta)) < 1e-14; }

}  // namespace bdm
