#include "bdm/weyl.hpp"

#include <algorithm>

#include "bdm/bdmap.hpp"
#include "bdm/odecore.hpp"
#include "bdm/resolvent.hpp"

namespace bdm {

namespace {

void check_alpha(double alpha)
{
    if (!(alpha >= 0.0 && alpha < kPi)) {
        throw DomainError("alpha must lie in [0, pi)");
    }
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// -s u + c du over c u + s du for a solution value (u, du) at x0.
cplx rotated_log_derivative(cplx u, cplx du, double alpha, double kappa)
{
    const double c = std::cos(alpha), s = std::sin(alpha);
    const cplx den = c * u + s * du;
    if (std::abs(den) * kappa <= 1e-13 * (std::abs(u) * kappa + std::abs(du))) {
        throw SingularDenominator("x0 is a zero of the rotated boundary form of the solution");
    }
    return (-s * u + c * du) / den;
}

}  // namespace

cplx wt_m(const PotentialSpec& V, cplx z, const ReferenceFrame& f, double tol)
{
    const double R = V.R();
    if (!(f.x0 >= 0.0 && f.x0 <= R && f.y0 >= 0.0 && f.y0 <= R) || f.x0 == f.y0) {
        throw DomainError("wt_m needs distinct x0, y0 in [0, R]");
    }
    const cplx cx = std::cos(f.xi), sx = std::sin(f.xi);
    ScaledSolution cols[2] = {{cx, sx, 0}, {-sx, cx, 0}};
    Propagator p(V, z, tol);
    p.advance(cols, f.x0, f.y0);
    const cplx ce = std::cos(f.eta), se = std::sin(f.eta);
    const cplx num = ce * cols[0].u - se * cols[0].du;
    const ScaledValue den{ce * cols[1].u - se * cols[1].du, cols[1].exp2};
    if (char_det_negligible(den, z, std::abs(f.y0 - f.x0))) {
        throw EigenvalueHit("wt_m: z is a pole (eigenvalue of the two-point problem)");
    }
    return -ldexp(num / den.value, cols[0].exp2 - den.exp2);
}

cplx interior_m(const PotentialSpec& V, cplx z, double x0, MSide side, const AnglePair& pair, double alpha,
                double tol)
{
    check_alpha(alpha);
    if (!(x0 > 0.0 && x0 < V.R())) {
        throw DomainError("interior_m needs x0 in (0, R)");
    }
    const double xs[1] = {x0};
    CauchyData anchor;
    if (side == MSide::Plus) {
        anchor = {-std::sin(pair.thetaR), -std::cos(pair.thetaR), V.R()};
    } else {
        anchor = {-std::sin(pair.theta0), std::cos(pair.theta0), 0.0};
    }
    const ScaledSolution s = sweep(V, z, anchor, xs, tol)[0];
    const double kappa = std::max(1.0, std::sqrt(std::abs(z)));
    return rotated_log_derivative(s.u, s.du, alpha, kappa);
}

WTMatrix wt_matrix(const PotentialSpec& V, cplx z, double x0, const AnglePair& pair, double alpha, double tol)
{
    const cplx mm = interior_m(V, z, x0, MSide::Minus, pair, alpha, tol);
    const cplx mp = interior_m(V, z, x0, MSide::Plus, pair, alpha, tol);
    const cplx d = mm - mp;
    if (std::abs(d) <= 1e-13 * (std::abs(mm) + std::abs(mp))) {
        throw DegenerateError("m- and m+ coincide at x0");
    }
    const cplx off = 0.5 * (mm + mp) / d;
    return {{1.0 / d, off, off, mm * mp / d}, alpha, x0, z};
}

double LinkReport::max_residual() const
{
    double m = 0.0;
    for (const auto& r : items) {
        if (!r.skipped) m = std::max(m, r.residual);
    }
    return m;
}

const LinkResidual* LinkReport::find(const std::string& name) const
{
    for (const auto& r : items) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

LinkReport green_link_check(const PotentialSpec& V, const AnglePair& pair, cplx z, double tol)
{
    const double R = V.R();
    const cplx c0 = std::cos(pair.theta0), s0 = std::sin(pair.theta0);
    const cplx cR = std::cos(pair.thetaR), sR = std::sin(pair.thetaR);
    const bool dir0 = is_dirichlet_angle(pair.theta0);
    const bool dirR = is_dirichlet_angle(pair.thetaR);
    const bool neu0 = std::abs(c0) < 1e-14;
    const bool neuR = std::abs(cR) < 1e-14;

    const FundamentalEval f = fundamental_system(V, z, R, tol);
    const Mat2 L = bdmap_from_fundamental(f, robin_quad(pair)).matrix;

    // Corner nodes for the Dirichlet limits come along in the same kernel.
    const double h = 1e-4;
    const GreenKernel G(V, pair, z, {0.0, h / 2, h, 2 * h, R, R - h / 2, R - h, R - 2 * h}, tol);
    const cplx G00 = G.value(0, 0);
    const cplx GRR = G.value(4, 4);

    const cplx mp = m_plus(V, pair.theta0, pair.thetaR, z, tol);
    const cplx mm = m_minus(V, pair.theta0, pair.thetaR, z, tol);

    LinkReport rep;
    auto add = [&rep](std::string name, bool skip, auto&& compute) {
        LinkResidual r{std::move(name), 0.0, skip};
        if (!skip) r.residual = compute();
        rep.items.push_back(std::move(r));
    };

    add("Lambda symmetric", false, [&] { return rel(L(0, 1), L(1, 0)); });
    add("Lambda11 = m+", false, [&] { return rel(L(0, 0), mp); });
    add("Lambda22 = -m-", false, [&] { return rel(L(1, 1), -mm); });
    add("Lambda11 from G(0,0)", dir0, [&] { return rel((G00 + s0 * c0) / (s0 * s0), L(0, 0)); });
    add("Lambda22 from G(R,R)", dirR, [&] { return rel((GRR + sR * cR) / (sR * sR), L(1, 1)); });
    add("G(0,0) from m+,0", dir0, [&] {
        const cplx m0 = m_plus(V, 0.0, pair.thetaR, z, tol);
        return rel(-s0 / (c0 + s0 * m0), G00);
    });
    add("G(0,0) from m+", dir0, [&] { return rel(s0 * (-c0 + s0 * mp), G00); });
    add("G(R,R) from m-,0", dirR, [&] {
        const cplx m0 = m_minus(V, pair.theta0, 0.0, z, tol);
        return rel(-sR / (cR - sR * m0), GRR);
    });
    add("G(R,R) from m-", dirR, [&] { return rel(sR * (-cR - sR * mm), GRR); });

    bool have_basis = true;
    BasisEndpoints b;
    try {
        b = basis_endpoints(f, pair);
    } catch (const NearEigenvalue&) {
        have_basis = false;
    }
    add("Lambda12 from G(R,R), u-'(0)", !have_basis || dirR || neu0,
        [&] { return rel(GRR / sR * (-b.uminus_at_0.du / c0), L(0, 1)); });
    add("Lambda12 from G(R,R), u-(0)", !have_basis || dirR || dir0,
        [&] { return rel(GRR / sR * (b.uminus_at_0.u / s0), L(0, 1)); });
    add("Lambda12 from G(0,0), u+'(R)", !have_basis || dir0 || neuR,
        [&] { return rel(G00 / s0 * (b.uplus_at_R.du / cR), L(0, 1)); });
    add("Lambda12 from G(0,0), u+(R)", !have_basis || dir0 || dirR,
        [&] { return rel(G00 / s0 * (b.uplus_at_R.u / sR), L(0, 1)); });

    // Mixed derivative of the x < x' branch at the corners, one-sided second
    // order stencils (steps h and h/2), then one Richardson step.
    auto corner = [&](std::size_t at, std::size_t half, std::size_t one, std::size_t two) {
        auto mixed = [&](std::array<std::size_t, 3> idx, double step) {
            const double a[3] = {-1.5, 2.0, -0.5};
            cplx s = 0.0;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    s += a[i] * a[j] * G.wedge(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
                }
            }
            // Both variables step the same way, so the direction sign cancels.
            return s / (step * step);
        };
        const cplx dh = mixed({at, one, two}, h);
        const cplx dh2 = mixed({at, half, one}, h / 2);
        return (4.0 * dh2 - dh) / 3.0;
    };
    add("Lambda11 corner limit of d1 d2 G", !(dir0 && dirR), [&] { return rel(corner(0, 1, 2, 3), L(0, 0)); });
    add("Lambda22 corner limit of d1 d2 G", !(dir0 && dirR), [&] { return rel(corner(4, 5, 6, 7), L(1, 1)); });
    return rep;
}

LinkReport wt_link_check(const PotentialSpec& V, const AnglePair& pair, cplx z, double x0, double alpha, double h,
                         double tol)
{
    check_alpha(alpha);
    if (!(x0 - h > 0.0 && x0 + h < V.R())) {
        throw DomainError("wt_link_check needs [x0 - h, x0 + h] inside (0, R)");
    }
    const Mat2 M0 = wt_matrix(V, z, x0, pair, 0.0, tol).matrix;
    const WTMatrix Ma = wt_matrix(V, z, x0, pair, alpha, tol);

    // Nodes x0 + k h/2, k = -2..2.
    std::vector<double> nodes;
    for (int k = -2; k <= 2; ++k) nodes.push_back(x0 + 0.5 * k * h);
    const GreenKernel G(V, pair, z, nodes, tol);
    auto w = [&](int i, int j) { return G.wedge(static_cast<std::size_t>(i + 2), static_cast<std::size_t>(j + 2)); };

    auto d1 = [&](int k, double step) { return (w(k, 0) - w(-k, 0)) / (2 * step); };
    auto d2 = [&](int k, double step) { return (w(0, k) - w(0, -k)) / (2 * step); };
    auto d12 = [&](int k, double step) { return (w(k, k) - w(k, -k) - w(-k, k) + w(-k, -k)) / (4 * step * step); };
    auto rich = [](cplx coarse, cplx fine) { return (4.0 * fine - coarse) / 3.0; };

    const cplx g = w(0, 0);
    // The lower branch and its mirror image share d1 + d2 and d1 d2, which is
    // all that enters the entries of M.
    const cplx sum = rich(d1(2, h) + d2(2, h), d1(1, h / 2) + d2(1, h / 2));
    const cplx mix = rich(d12(2, h), d12(1, h / 2));

    const double c = std::cos(alpha), s = std::sin(alpha);
    const double scale0 = max_abs(M0);
    const double scalea = max_abs(Ma.matrix);
    LinkReport rep;
    rep.items.push_back({"M0 11 = G", std::abs(M0(0, 0) - g) / scale0, false});
    rep.items.push_back({"M0 12 = (d1 + d2) G / 2", std::abs(M0(0, 1) - 0.5 * sum) / scale0, false});
    rep.items.push_back({"M0 22 = d1 d2 G", std::abs(M0(1, 1) - mix) / scale0, false});
    rep.items.push_back(
        {"Malpha 11", std::abs(Ma.matrix(0, 0) - (c * c * g + c * s * sum + s * s * mix)) / scalea, false});
    rep.items.push_back({"Malpha 12",
                         std::abs(Ma.matrix(0, 1) - (-c * s * g + 0.5 * (c * c - s * s) * sum + c * s * mix)) / scalea,
                         false});
    rep.items.push_back(
        {"Malpha 22", std::abs(Ma.matrix(1, 1) - (s * s * g - c * s * sum + c * c * mix)) / scalea, false});
    rep.items.push_back({"det Malpha = -1/4", std::abs(Ma.matrix.det() + 0.25), false});
    return rep;
}

}  // namespace bdm
