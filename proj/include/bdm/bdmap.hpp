#pragma once

#include <vector>

#include "bdm/core.hpp"
#include "bdm/odecore.hpp"
#include "bdm/potential.hpp"
#include "bdm/traces.hpp"

namespace bdm {

// Lambda^{theta'}_{theta}(z): maps the theta-trace of a solution of
// -u'' + V u = z u to its theta'-trace.
struct BoundaryDataMap {
    Mat2 matrix;
    cplx z{0.0};
    AngleQuad quad;
};

// Entries are ratios of determinants built from theta, phi at R, so the map is
// finite wherever Delta(z, R, theta0, thetaR) is not negligible, including the
// spectra of the auxiliary operators H_{theta0,0} and H_{0,thetaR}.
[[nodiscard]] BoundaryDataMap bdmap_from_fundamental(const FundamentalEval& at_R, const AngleQuad& quad);

[[nodiscard]] BoundaryDataMap bdmap_general(const PotentialSpec& V, const AngleQuad& quad, cplx z,
                                            double tol = kDefaultTol);

// Robin-to-Robin map: target angles are the source angles plus pi/2.
[[nodiscard]] BoundaryDataMap bdmap_robin(const PotentialSpec& V, const AnglePair& pair, cplx z,
                                          double tol = kDefaultTol);

[[nodiscard]] AngleQuad robin_quad(const AnglePair& pair);

// m_{+,theta0}(z, thetaR) and m_{-,thetaR}(z, theta0) from u+'(0) and u-'(R).
// When u+ or u- is undefined (z in the spectrum of an auxiliary operator) the
// value is taken from the determinant-ratio form of the Robin map instead.
[[nodiscard]] cplx m_plus(const PotentialSpec& V, cplx theta0, cplx thetaR, cplx z, double tol = kDefaultTol);
[[nodiscard]] cplx m_minus(const PotentialSpec& V, cplx theta0, cplx thetaR, cplx z, double tol = kDefaultTol);

// Leading behavior of the Robin map as |z| -> infinity with Im(sqrt z) > 0.
// Diagonal: cot(theta) for sin(theta) != 0, i sqrt(z) otherwise.
[[nodiscard]] Mat2 asymptotic_reference(const AnglePair& pair, cplx z, double R);

// Im(Lambda^{theta'}_{theta}(z) S_{theta'-theta}) for real V and real angles
// with both angle differences nonzero mod pi.
[[nodiscard]] Mat2 herglotz_imag(const PotentialSpec& V, const AngleQuad& quad, cplx z, double tol = kDefaultTol);

struct PointMass {
    Mat2 jump;          // Hermitian
    double spread{0.0}; // difference between the two highest extrapolation orders
};

// Sigma({lambda}) from eps Im(Lambda S)(lambda + i eps), extrapolated to eps = 0
// in powers of eps^2.
[[nodiscard]] PointMass measure_point_mass(const PotentialSpec& V, const AngleQuad& quad, double lambda,
                                           const std::vector<double>& eps = {1e-3, 1e-4, 1e-5},
                                           double tol = kDefaultTol);

}  // namespace bdm
