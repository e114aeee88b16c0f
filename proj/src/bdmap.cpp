#include "bdm/bdmap.hpp"

#include <cmath>
#include <string>

namespace bdm {

namespace {

struct RowCoeffs {
    cplx a;  // cos(tR) theta(R) - sin(tR) theta'(R)
    cplx b;  // cos(tR) phi(R) - sin(tR) phi'(R)
};

RowCoeffs right_row(const FundamentalEval& f, cplx tR)
{
    const cplx c = std::cos(tR), s = std::sin(tR);
    return {c * f.theta - s * f.dtheta, c * f.phi - s * f.dphi};
}

}  // namespace

AngleQuad robin_quad(const AnglePair& pair) { return {pair, pair.quarter_turn()}; }

BoundaryDataMap bdmap_from_fundamental(const FundamentalEval& f, const AngleQuad& quad)
{
    const AnglePair& p = quad.base;
    const AnglePair& q = quad.primed;
    const cplx c0 = std::cos(p.theta0), s0 = std::sin(p.theta0);
    const cplx c0p = std::cos(q.theta0), s0p = std::sin(q.theta0);
    const RowCoeffs r = right_row(f, p.thetaR);
    const RowCoeffs rp = right_row(f, q.thetaR);

    const ScaledValue delta{c0 * r.b - s0 * r.a, f.exp2};
    if (char_det_negligible(delta, f.z, f.x)) {
        throw EigenvalueHit("z is an eigenvalue of H_{theta0,thetaR}");
    }
    // Lambda = U_{theta'} U_theta^{-1} with U_theta = [[c0, s0], [a, b]] acting
    // on the coefficients of u in the basis (theta, phi); det U_theta = Delta.
    // The (2,1) entry uses theta phi' - theta' phi = 1 exactly.
    const cplx d = delta.value;
    const cplx inv_true = ldexp(1.0 / d, -f.exp2);
    BoundaryDataMap out;
    out.z = f.z;
    out.quad = quad;
    out.matrix = {(c0p * r.b - s0p * r.a) / d, std::sin(q.theta0 - p.theta0) * inv_true,
                  std::sin(q.thetaR - p.thetaR) * inv_true, (rp.b * c0 - rp.a * s0) / d};
    return out;
}

BoundaryDataMap bdmap_general(const PotentialSpec& V, const AngleQuad& quad, cplx z, double tol)
{
    return bdmap_from_fundamental(fundamental_system(V, z, V.R(), tol), quad);
}

BoundaryDataMap bdmap_robin(const PotentialSpec& V, const AnglePair& pair, cplx z, double tol)
{
    return bdmap_general(V, robin_quad(pair), z, tol);
}

cplx m_plus(const PotentialSpec& V, cplx theta0, cplx thetaR, cplx z, double tol)
{
    const FundamentalEval f = fundamental_system(V, z, V.R(), tol);
    const AnglePair pair(theta0, thetaR);
    const ScaledValue delta = char_det_scaled(f, pair.theta0, pair.thetaR);
    if (char_det_negligible(delta, z, V.R())) {
        throw EigenvalueHit("z is an eigenvalue of H_{theta0,thetaR}");
    }
    try {
        const BasisEndpoints b = basis_endpoints(f, pair);
        const cplx c0 = std::cos(pair.theta0), s0 = std::sin(pair.theta0);
        const cplx w = b.uplus_at_0.du;
        return (-s0 + c0 * w) / (c0 + s0 * w);
    } catch (const NearEigenvalue&) {
        return bdmap_from_fundamental(f, robin_quad(pair)).matrix(0, 0);
    }
}

cplx m_minus(const PotentialSpec& V, cplx theta0, cplx thetaR, cplx z, double tol)
{
    const FundamentalEval f = fundamental_system(V, z, V.R(), tol);
    const AnglePair pair(theta0, thetaR);
    const ScaledValue delta = char_det_scaled(f, pair.theta0, pair.thetaR);
    if (char_det_negligible(delta, z, V.R())) {
        throw EigenvalueHit("z is an eigenvalue of H_{theta0,thetaR}");
    }
    try {
        const BasisEndpoints b = basis_endpoints(f, pair);
        const cplx cR = std::cos(pair.thetaR), sR = std::sin(pair.thetaR);
        const cplx w = b.uminus_at_R.du;
        return (sR + cR * w) / (cR - sR * w);
    } catch (const NearEigenvalue&) {
        return -bdmap_from_fundamental(f, robin_quad(pair)).matrix(1, 1);
    }
}

Mat2 asymptotic_reference(const AnglePair& pair, cplx z, double R)
{
    const cplx k = sqrt_branch(z);
    if (!(k.imag() > 0.0)) {
        throw DomainError("asymptotic_reference needs Im(sqrt z) > 0");
    }
    const cplx c0 = std::cos(pair.theta0), s0 = std::sin(pair.theta0);
    const cplx cR = std::cos(pair.thetaR), sR = std::sin(pair.thetaR);
    const bool d0 = is_dirichlet_angle(pair.theta0);
    const bool dR = is_dirichlet_angle(pair.thetaR);
    const cplx e = std::exp(kI * k * R);

    const cplx m11 = d0 ? kI * k : c0 / s0;
    const cplx m22 = dR ? kI * k : cR / sR;
    cplx off;
    if (!d0 && !dR) {
        off = 2.0 * kI * e / (k * s0 * sR);
    } else if (d0 && !dR) {
        off = -2.0 * e / (c0 * sR);
    } else if (!d0 && dR) {
        off = -2.0 * e / (s0 * cR);
    } else {
        off = -2.0 * kI * k * e / (c0 * cR);
    }
    return {m11, off, off, m22};
}

Mat2 herglotz_imag(const PotentialSpec& V, const AngleQuad& quad, cplx z, double tol)
{
    if (!V.is_real() || !quad.is_real()) {
        throw DomainError("herglotz_imag needs a real potential and real angles");
    }
    const Mat2 S = diag_sin(quad);
    if (std::abs(S(0, 0)) < 1e-14 || std::abs(S(1, 1)) < 1e-14) {
        throw DomainError("herglotz_imag needs both angle differences nonzero mod pi");
    }
    return imag_part(bdmap_general(V, quad, z, tol).matrix * S);
}

PointMass measure_point_mass(const PotentialSpec& V, const AngleQuad& quad, double lambda,
                             const std::vector<double>& eps, double tol)
{
    if (eps.size() < 2) {
        throw DomainError("measure_point_mass needs at least two eps values");
    }
    if (!V.is_real() || !quad.is_real()) {
        throw DomainError("measure_point_mass needs the self-adjoint case");
    }
    const Mat2 S = diag_sin(quad);
    const std::size_t n = eps.size();
    // Neville table in t = eps^2, evaluated at t = 0, entrywise.
    std::vector<Mat2> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Mat2 m = bdmap_general(V, quad, cplx(lambda, eps[i]), tol).matrix * S;
        p[i] = eps[i] * imag_part(m);
    }
    Mat2 prev = p[n - 1];
    for (std::size_t level = 1; level < n; ++level) {
        prev = p[n - 1];
        for (std::size_t i = n - 1; i >= level; --i) {
            const double ti = eps[i] * eps[i];
            const double tj = eps[i - level] * eps[i - level];
            p[i] = (1.0 / (tj - ti)) * cplx(tj) * p[i] - (1.0 / (tj - ti)) * cplx(ti) * p[i - 1];
        }
    }
    PointMass out;
    out.jump = 0.5 * (p[n - 1] + p[n - 1].adjoint());
    out.spread = max_abs(out.jump - prev);
    const double scale = std::max(1.0, max_abs(out.jump));
    if (!std::isfinite(out.spread) || out.spread > 1e-3 * scale) {
        throw AccuracyError("point-mass extrapolation did not settle: spread " + std::to_string(out.spread));
    }
    return out;
}

}  // namespace bdm
