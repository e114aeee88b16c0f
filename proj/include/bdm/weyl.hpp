#pragma once

#include <string>
#include <vector>

#include "bdm/core.hpp"
#include "bdm/potential.hpp"
#include "bdm/traces.hpp"

namespace bdm {

// Normalization point x0 with angle xi for the fundamental matrix, and
// evaluation point y0 with angle eta for the boundary condition.
struct ReferenceFrame {
    double x0{0.0};
    cplx xi{0.0};
    double y0{0.0};
    cplx eta{0.0};
};

// m(z; x0, alpha(xi); y0, beta(eta)) = -[cos eta vt - sin eta vt'] / [cos eta vp - sin eta vp'] at y0,
// where (vt, vp) is the fundamental matrix equal to the rotation by xi at x0.
[[nodiscard]] cplx wt_m(const PotentialSpec& V, cplx z, const ReferenceFrame& frame, double tol = kDefaultTol);

enum class MSide { Plus, Minus };

// m_{+,alpha}(z, x0, thetaR) or m_{-,alpha}(z, x0, theta0): the logarithmic
// derivative at x0 of the solution satisfying the right (resp. left) boundary
// condition, rotated by alpha in [0, pi).
[[nodiscard]] cplx interior_m(const PotentialSpec& V, cplx z, double x0, MSide side, const AnglePair& pair,
                              double alpha, double tol = kDefaultTol);

struct WTMatrix {
    Mat2 matrix;
    double alpha{0.0};
    double x0{0.0};
    cplx z{0.0};
};

[[nodiscard]] WTMatrix wt_matrix(const PotentialSpec& V, cplx z, double x0, const AnglePair& pair, double alpha,
                                 double tol = kDefaultTol);

struct LinkResidual {
    std::string name;
    double residual{0.0};
    bool skipped{false};
};

struct LinkReport {
    std::vector<LinkResidual> items;

    [[nodiscard]] double max_residual() const;
    [[nodiscard]] const LinkResidual* find(const std::string& name) const;
};

// Endpoint links between the Robin map, m+-, and G(z, ., .). Relations that
// need sin(theta) != 0 (or cos != 0) are marked skipped when it vanishes. For
// pair = (0, 0) the corner limits of the mixed derivative of G are included,
// from one-sided differences refined once by Richardson extrapolation.
[[nodiscard]] LinkReport green_link_check(const PotentialSpec& V, const AnglePair& pair, cplx z,
                                          double tol = kDefaultTol);

// Entries of M_0 and M_alpha at x0 against G and its partial derivatives at
// (x0, x0), the latter from central differences with step h, refined once by
// Richardson extrapolation, on the x < x' branch of G continued across the
// diagonal and symmetrized.
[[nodiscard]] LinkReport wt_link_check(const PotentialSpec& V, const AnglePair& pair, cplx z, double x0,
                                       double alpha, double h = 1e-4, double tol = kDefaultTol);

}  // namespace bdm
