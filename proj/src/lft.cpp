#include "bdm/lft.hpp"

#include <cmath>
#include <string>

#include "bdm/bdmap.hpp"
#include "bdm/odecore.hpp"

namespace bdm {

namespace {

using Dense4 = std::array<std::array<cplx, 4>, 4>;

Dense4 to_dense(const Block4& a)
{
    Dense4 d{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) d[i][j] = a.at(i, j);
    return d;
}

Block4 from_dense(const Dense4& d)
{
    Block4 b;
    const auto blk = [&](int r, int c) { return Mat2{d[r][c], d[r][c + 1], d[r + 1][c], d[r + 1][c + 1]}; };
    b.a11 = blk(0, 0);
    b.a12 = blk(0, 2);
    b.a21 = blk(2, 0);
    b.a22 = blk(2, 2);
    return b;
}

double rel_residual(const Mat2& a, const Mat2& b)
{
    const double scale = std::max(max_abs(a), 1e-300);
    return max_abs(a - b) / scale;
}

bool nonzero_mod_pi(cplx d)
{
    // sin vanishes only on real multiples of pi.
    return std::abs(std::sin(d)) > 1e-12;
}

// Connector blocks without the real-angle restriction.
Block4 connector_blocks(const AngleQuad& th, const AngleQuad& de)
{
    const Mat2 s_th = diag_sin(th);
    const Mat2 s_de = diag_sin(de);
    const Mat2 s_th_inv = inverse(s_th);
    const Mat2 s_de_inv = inverse(s_de);
    const auto sd = [](cplx a0, cplx aR, cplx b0, cplx bR) { return diag_sin(a0 - b0, aR - bR); };
    const AnglePair& t = th.base;
    const AnglePair& tp = th.primed;
    const AnglePair& d = de.base;
    const AnglePair& dp = de.primed;
    Block4 a;
    a.a11 = s_th_inv * sd(dp.theta0, dp.thetaR, t.theta0, t.thetaR);
    a.a12 = s_th_inv * s_de_inv * sd(t.theta0, t.thetaR, d.theta0, d.thetaR);
    a.a21 = sd(dp.theta0, dp.thetaR, tp.theta0, tp.thetaR);
    a.a22 = s_de_inv * sd(tp.theta0, tp.thetaR, d.theta0, d.thetaR);
    return a;
}

bool quad_invertible(const AngleQuad& q)
{
    return nonzero_mod_pi(q.primed.theta0 - q.base.theta0) && nonzero_mod_pi(q.primed.thetaR - q.base.thetaR);
}

bool is_robin(const AngleQuad& q)
{
    const AngleQuad r = robin_quad(q.base);
    return std::abs(r.primed.theta0 - q.primed.theta0) < 1e-12 && std::abs(r.primed.thetaR - q.primed.thetaR) < 1e-12;
}

Mat2 bracket_inverse(const Mat2& m, const char* name)
{
    try {
        return inverse_guarded(m);
    } catch (const SingularDenominator& e) {
        throw SingularDenominator(std::string(name) + ": " + e.what());
    }
}

}  // namespace

cplx Block4::at(int i, int j) const
{
    const Mat2& b = i < 2 ? (j < 2 ? a11 : a12) : (j < 2 ? a21 : a22);
    return b(i % 2, j % 2);
}

Block4 Block4::adjoint() const { return {a11.adjoint(), a21.adjoint(), a12.adjoint(), a22.adjoint()}; }

Block4 operator*(const Block4& a, const Block4& b)
{
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22, a.a21 * b.a11 + a.a22 * b.a21,
            a.a21 * b.a12 + a.a22 * b.a22};
}

Block4 operator-(const Block4& a, const Block4& b)
{
    return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}

double max_abs(const Block4& a)
{
    return std::max({max_abs(a.a11), max_abs(a.a12), max_abs(a.a21), max_abs(a.a22)});
}

Block4 inverse(const Block4& a)
{
    Dense4 m = to_dense(a);
    Dense4 inv{};
    for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
    const double scale = max_abs(a);
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int r = c + 1; r < 4; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (!(std::abs(m[piv][c]) > 1e-14 * scale)) throw SingularDenominator("4x4 block matrix is singular");
        std::swap(m[c], m[piv]);
        std::swap(inv[c], inv[piv]);
        const cplx p = m[c][c];
        for (int j = 0; j < 4; ++j) {
            m[c][j] /= p;
            inv[c][j] /= p;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == c) continue;
            const cplx f = m[r][c];
            if (f == cplx(0.0)) continue;
            for (int j = 0; j < 4; ++j) {
                m[r][j] -= f * m[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return from_dense(inv);
}

Mat2 moebius(const Block4& A, const Mat2& L, double max_cond)
{
    const Mat2 den = A.a11 + A.a12 * L;
    return (A.a21 + A.a22 * L) * inverse_guarded(den, max_cond);
}

ClassA4Check in_class_A4(const Block4& A, double tol)
{
    ClassA4Check out;
    const Block4 J = Block4::j4();
    out.residual = max_abs(A.adjoint() * J * A - J);
    const double r1 = max_abs(A.a11.adjoint() * A.a21 - A.a21.adjoint() * A.a11);
    const double r2 = max_abs(A.a22.adjoint() * A.a12 - A.a12.adjoint() * A.a22);
    const double r3 = max_abs(A.a11.adjoint() * A.a22 - A.a21.adjoint() * A.a12 - Mat2::identity());
    out.block_residual = std::max({r1, r2, r3});
    out.member = out.residual <= tol * std::max(1.0, max_abs(A) * max_abs(A));
    return out;
}

std::array<double, 2> symplectic_inverse_residuals(const Block4& A)
{
    const Block4 B{A.a22.adjoint(), -A.a12.adjoint(), -A.a21.adjoint(), A.a11.adjoint()};
    const Block4 I = Block4::identity();
    return {max_abs(B * A - I), max_abs(A * B - I)};
}

Block4 connector(const AngleQuad& theta, const AngleQuad& delta)
{
    if (!theta.is_real() || !delta.is_real()) {
        throw DomainError("connector needs real angles; use the Dirichlet reference block for complex ones");
    }
    if (!quad_invertible(theta)) throw DegenerateError("theta' - theta is 0 mod pi in some component");
    if (!quad_invertible(delta)) throw DegenerateError("delta' - delta is 0 mod pi in some component");
    return connector_blocks(theta, delta);
}

Block4 dirichlet_reference_block(const AngleQuad& quad)
{
    return {diag_cos(quad.base.theta0, quad.base.thetaR), diag_sin(quad.base.theta0, quad.base.thetaR),
            diag_cos(quad.primed.theta0, quad.primed.thetaR), diag_sin(quad.primed.theta0, quad.primed.thetaR)};
}

double congruence_residual(const Block4& A, const Mat2& L)
{
    const Mat2 dinv = inverse(A.a11 + A.a12 * L);
    const Mat2 lhs = imag_part(moebius(A, L, 1e300));
    const Mat2 rhs = dinv.adjoint() * imag_part(L) * dinv;
    return max_abs(lhs - rhs) / std::max(max_abs(lhs), 1e-300);
}

LftReport verify_lft_relation(const PotentialSpec& V, const AngleQuad& quadA, const AngleQuad& quadB, cplx z,
                              double tol)
{
    if (!quad_invertible(quadB)) throw DegenerateError("reference quad has delta' - delta = 0 mod pi");
    const FundamentalEval f = fundamental_system(V, z, V.R(), tol);
    const Mat2 lamA = bdmap_from_fundamental(f, quadA).matrix;
    const Mat2 lamB = bdmap_from_fundamental(f, quadB).matrix;

    const AnglePair& t = quadA.base;
    const AnglePair& tp = quadA.primed;
    const AnglePair& d = quadB.base;
    const AnglePair& dp = quadB.primed;
    const Mat2 sB = diag_sin(quadB);
    const Mat2 sB_inv = inverse(sB);

    LftReport rep{};
    {
        const Mat2 outer = diag_sin(dp.theta0 - tp.theta0, dp.thetaR - tp.thetaR) +
                           diag_sin(tp.theta0 - d.theta0, tp.thetaR - d.thetaR) * lamB;
        const Mat2 inner = diag_sin(dp.theta0 - t.theta0, dp.thetaR - t.thetaR) +
                           diag_sin(t.theta0 - d.theta0, t.thetaR - d.thetaR) * lamB;
        const Mat2 rhs = sB_inv * outer * bracket_inverse(inner, "[S(delta'-theta) + S(theta-delta) Lambda_B]") * sB;
        rep.theorem = rel_residual(lamA, rhs);
    }
    if (quad_invertible(quadA)) {
        const Block4 A = connector_blocks(quadA, quadB);
        const Mat2 L = lamB * sB;
        const Mat2 inner = A.a11 + A.a12 * L;
        const Mat2 rhs = (A.a21 + A.a22 * L) * bracket_inverse(inner, "[A11 + A12 Lambda_B S_B]");
        rep.s_form = rel_residual(lamA * diag_sin(quadA), rhs);
    }
    if (is_robin(quadA) && is_robin(quadB)) {
        const Mat2 s = diag_sin(t.theta0 - d.theta0, t.thetaR - d.thetaR);
        const Mat2 c = diag_cos(t.theta0 - d.theta0, t.thetaR - d.thetaR);
        const Mat2 rhs = (c * lamB - s) * bracket_inverse(c + s * lamB, "[C(theta-delta) + S(theta-delta) Lambda_B]");
        rep.robin_form = rel_residual(lamA, rhs);
    }
    try {
        const AngleQuad dir{AnglePair(0.0, 0.0), AnglePair(kPi / 2, kPi / 2)};
        const Mat2 lam00 = bdmap_from_fundamental(f, dir).matrix;
        const Block4 Bd = dirichlet_reference_block(quadA);
        const Mat2 inner = Bd.a11 + Bd.a12 * lam00;
        const Mat2 rhs = (Bd.a21 + Bd.a22 * lam00) * bracket_inverse(inner, "[C_theta + S_theta Lambda_00]");
        rep.dirichlet_form = rel_residual(lamA, rhs);
    } catch (const EigenvalueHit&) {
        rep.dirichlet_form = -1.0;
    }
    return rep;
}

}  // namespace bdm
