#pragma once

#include <array>

#include "bdm/core.hpp"

namespace bdm {

// Shifts theta by a multiple of 2*pi so that 0 <= Re(theta) < 2*pi.
[[nodiscard]] cplx normalize_strip(cplx theta);

// Boundary angles (theta0, thetaR), normalized into the strip on construction.
struct AnglePair {
    cplx theta0{0.0};
    cplx thetaR{0.0};

    AnglePair() = default;
    AnglePair(cplx t0, cplx tR) : theta0(normalize_strip(t0)), thetaR(normalize_strip(tR)) {}

    [[nodiscard]] bool is_real() const { return theta0.imag() == 0.0 && thetaR.imag() == 0.0; }
    // Both angles shifted by pi, which leaves the operator unchanged.
    [[nodiscard]] AnglePair pi_shifted() const { return {theta0 + kPi, thetaR + kPi}; }
    // Angles of the Robin-to-Robin target trace.
    [[nodiscard]] AnglePair quarter_turn() const { return {theta0 + kPi / 2, thetaR + kPi / 2}; }
};

// Source angles `base` and target angles `primed` of a boundary data map.
struct AngleQuad {
    AnglePair base;
    AnglePair primed;

    [[nodiscard]] bool is_real() const { return base.is_real() && primed.is_real(); }
    [[nodiscard]] AngleQuad inverted() const { return {primed, base}; }
};

struct BoundaryValues {
    cplx u0{0.0};
    cplx du0{0.0};
    cplx uR{0.0};
    cplx duR{0.0};
};

// (cos theta0 u(0) + sin theta0 u'(0), cos thetaR u(R) - sin thetaR u'(R)).
[[nodiscard]] std::array<cplx, 2> trace_gamma(const AnglePair& pair, const BoundaryValues& b);

[[nodiscard]] Mat2 diag_sin(cplx a, cplx b);
[[nodiscard]] Mat2 diag_cos(cplx a, cplx b);

// S and C of the angle differences primed - base.
[[nodiscard]] Mat2 diag_sin(const AngleQuad& q);
[[nodiscard]] Mat2 diag_cos(const AngleQuad& q);

// True when sin(theta) vanishes to rounding, i.e. theta is 0 or pi (Dirichlet type).
[[nodiscard]] bool is_dirichlet_angle(cplx theta);

}  // namespace bdm
