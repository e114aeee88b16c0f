#include "doctest.h"

#include <vector>

#include "bdm/odecore.hpp"
#include "oracle.hpp"

using namespace bdm;

namespace {

constexpr double kSinhPi = 11.548739357257748378;
constexpr double kInvSinhPi = 0.086589537530046941828;

PotentialSpec random_piecewise(oracle::Gen& g, double R, double vmax, double vimag)
{
    const double b1 = g.uniform(0.1, 0.45) * R;
    const double b2 = g.uniform(0.55, 0.9) * R;
    return PotentialSpec::piecewise_constant(R, {b1, b2},
                                             {g.cuniform(-vmax, vmax, -vimag, vimag),
                                              g.cuniform(-vmax, vmax, -vimag, vimag),
                                              g.cuniform(-vmax, vmax, -vimag, vimag)});
}

double rel_vec(const std::array<cplx, 4>& a, const std::array<cplx, 4>& b)
{
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return d / s;
}

}  // namespace

TEST_CASE("propagate: free equation")
{
    const auto V = PotentialSpec::zero(kPi);
    const CauchyData c = propagate(V, 0.0, {1.0, 0.0, 0.0}, 2.0);
    CHECK(std::abs(c.u - 1.0) < 1e-13);
    CHECK(std::abs(c.du) < 1e-13);
    for (double x : {0.3, 1.0, 2.5, kPi}) {
        const CauchyData s = propagate(V, 1.0, {0.0, 1.0, 0.0}, x);
        CHECK(std::abs(s.u - std::sin(x)) < 1e-10);
        CHECK(std::abs(s.du - std::cos(x)) < 1e-10);
        CHECK(s.x == x);
    }
    // Backwards from pi to 0.
    const CauchyData back = propagate(V, 1.0, {0.0, -1.0, kPi}, 0.0);
    CHECK(std::abs(back.u) < 1e-10);
    CHECK(std::abs(back.du - 1.0) < 1e-10);
}

TEST_CASE("propagate matches the transfer-matrix oracle for piecewise-constant V")
{
    oracle::Gen g(42);
    for (int i = 0; i < 30; ++i) {
        const double R = g.uniform(1.0, 4.0);
        const auto V = random_piecewise(g, R, 5.0, 2.0);
        const cplx z = g.cuniform(-10, 30, -3, 3);
        const double a = g.uniform(0, R);
        const double b = g.uniform(0, R);
        const CauchyData start{g.cuniform(-1, 1, -1, 1), g.cuniform(-1, 1, -1, 1), a};
        const CauchyData end = propagate(V, z, start, b);
        const Mat2 T = a <= b ? transfer_matrix_piecewise(V, z, a, b) : inverse(transfer_matrix_piecewise(V, z, b, a));
        const auto ref = T * std::array<cplx, 2>{start.u, start.du};
        const double scale = std::max(std::abs(ref[0]), std::abs(ref[1]));
        CHECK(std::abs(end.u - ref[0]) < 1e-9 * scale);
        CHECK(std::abs(end.du - ref[1]) < 1e-9 * scale);
    }
}

TEST_CASE("propagate_many agrees with single propagations on both sides")
{
    oracle::Gen g(7);
    const auto V = random_piecewise(g, 3.0, 4.0, 1.0);
    const cplx z(2.0, 1.0);
    const CauchyData from{1.0, cplx(0.5, -0.2), 1.4};
    const std::vector<double> xs{0.2, 2.9, 1.4, 0.9, 2.0};
    const auto many = propagate_many(V, z, from, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const CauchyData one = propagate(V, z, from, xs[i]);
        CHECK(std::abs(many[i].u - one.u) < 1e-9 * (1 + std::abs(one.u)));
        CHECK(many[i].x == xs[i]);
    }
}

TEST_CASE("fundamental_system: free closed form, initial data, Wronskian")
{
    const auto V = PotentialSpec::zero(3.0);
    oracle::Gen g(1);
    for (int i = 0; i < 25; ++i) {
        const cplx z = g.cuniform(-20, 40, -5, 5);
        const double x = g.uniform(0.0, 3.0);
        const FundamentalEval f = fundamental_system(V, z, x);
        CHECK(f.exp2 == 0);
        const auto ref = oracle::free_fundamental(z, x);
        CHECK(rel_vec({f.theta, f.dtheta, f.phi, f.dphi}, ref) < 1e-9);
        const double scale = std::abs(f.theta * f.dphi) + std::abs(f.dtheta * f.phi);
        CHECK(std::abs(f.scaled_wronskian() - 1.0) < 1e-8 * scale);
    }
    const FundamentalEval at0 = fundamental_system(V, cplx(3.0, 1.0), 0.0);
    CHECK(at0.theta == cplx(1.0));
    CHECK(at0.dtheta == cplx(0.0));
    CHECK(at0.phi == cplx(0.0));
    CHECK(at0.dphi == cplx(1.0));
}

TEST_CASE("fundamental_system matches transfer-matrix products (relative 1e-9)")
{
    oracle::Gen g(2024);
    for (int i = 0; i < 50; ++i) {
        const double R = g.uniform(1.0, 4.0);
        const auto V = random_piecewise(g, R, 10.0, 3.0);
        const cplx z = g.cuniform(-20, 50, -10, 10);
        const FundamentalEval f = fundamental_system(V, z, R);
        const Mat2 T = transfer_matrix_piecewise(V, z, 0.0, R);
        CHECK(rel_vec({f.theta, f.dtheta, f.phi, f.dphi}, {T(0, 0), T(1, 0), T(0, 1), T(1, 1)}) < 1e-9);
    }
}

TEST_CASE("Wronskian of the fundamental system is constant for sampled complex V")
{
    oracle::Gen g(77);
    std::vector<double> grid;
    std::vector<cplx> vals;
    for (int i = 0; i <= 40; ++i) {
        grid.push_back(2.0 * i / 40.0);
        vals.push_back(g.cuniform(-3, 3, -3, 3));
    }
    grid.back() = 2.0;
    const auto V = PotentialSpec::sampled(2.0, grid, vals);
    for (cplx z : {cplx(1, 1), cplx(-30, 2), cplx(100, -5), cplx(0, 400), cplx(0, 1e5)}) {
        // Relative to the size of the two products whose difference is W.
        FundamentalEval f = fundamental_system(V, z, 2.0);
        const double m = std::max({std::abs(f.theta), std::abs(f.dtheta), std::abs(f.phi), std::abs(f.dphi)});
        f.theta /= m;
        f.dtheta /= m;
        f.phi /= m;
        f.dphi /= m;
        const double scale = std::abs(f.theta * f.dphi) + std::abs(f.dtheta * f.phi);
        CHECK(std::abs(f.scaled_wronskian() - std::pow(0.25, f.exp2) / (m * m)) < 1e-8 * scale);
    }
}

TEST_CASE("char_det special values")
{
    const auto V = PotentialSpec::zero(kPi);
    CHECK(oracle::rel_err(char_det(V, -1.0, 0.0, 0.0), kSinhPi) < 1e-9);
    CHECK(std::abs(char_det(V, 4.0, 0.0, 0.0)) < 1e-10);
    oracle::Gen g(31);
    for (int i = 0; i < 20; ++i) {
        const cplx z = g.cuniform(-10, 30, 0.5, 4);
        const cplx t0 = g.cuniform(0, 6.28, -0.5, 0.5);
        const cplx tR = g.cuniform(0, 6.28, -0.5, 0.5);
        const cplx d = char_det(V, z, t0, tR);
        CHECK(oracle::rel_err(d, oracle::free_delta(z, kPi, t0, tR)) < 1e-8);
        // pi shift of both angles flips the sign of both rows, leaving Delta unchanged.
        CHECK(oracle::rel_err(char_det(V, z, t0 + kPi, tR + kPi), d) < 1e-10);
    }
}

TEST_CASE("char_det is analytic: mean value over a circle")
{
    oracle::Gen g(12);
    const auto V = random_piecewise(g, 2.5, 3.0, 1.0);
    for (cplx c : {cplx(1.0, 0.5), cplx(-4.0, 2.0), cplx(12.0, -1.0)}) {
        const cplx t0(0.4, 0.1), tR(2.0, -0.2);
        const int n = 32;
        cplx mean = 0.0;
        for (int j = 0; j < n; ++j) {
            mean += char_det(V, c + 0.5 * std::polar(1.0, 2.0 * kPi * j / n), t0, tR);
        }
        mean /= static_cast<double>(n);
        const cplx center = char_det(V, c, t0, tR);
        CHECK(std::abs(mean - center) < 1e-6 * (1.0 + std::abs(center)));
    }
}

TEST_CASE("Volterra asymptotics of theta along the imaginary axis")
{
    // Unit L1 norm: V = 1/R on [0, R].
    const double R = 2.0;
    const auto V = PotentialSpec::piecewise_constant(R, {1.0}, {0.5, 0.5});
    std::vector<double> scaled;
    for (double t : {1e2, 1e4, 1e6}) {
        const cplx z(0.0, t);
        const cplx k = oracle::root(z);
        const FundamentalEval f = fundamental_system(V, z, R);
        // Compare theta(z,R) e^{-Im k R} with cos(kR) e^{-Im k R}.
        const double L = k.imag() * R;
        const cplx theta_scaled = f.theta * std::exp(f.exp2 * std::log(2.0) - L);
        const cplx cos_scaled = 0.5 * (std::exp(kI * k * R - L) + std::exp(-kI * k * R - L));
        scaled.push_back(std::abs(theta_scaled - cos_scaled));
    }
    // Error * |z|^{1/2} stays bounded, and the decay exponent is at least 1/2.
    const double C = std::max({scaled[0] * 10.0, scaled[1] * 100.0, scaled[2] * 1000.0});
    CHECK(C < 5.0);
    const double slope = std::log(scaled[2] / scaled[0]) / std::log(1e4);
    CHECK(slope < -0.45);
}

TEST_CASE("basis_endpoints: free Dirichlet closed forms and normalizations")
{
    const auto V = PotentialSpec::zero(kPi);
    const cplx z(-1.0, 0.0);
    const BasisEndpoints b = basis_endpoints(V, z, 0.0, 0.0);
    CHECK(b.uminus_at_R.u == cplx(1.0));
    CHECK(b.uplus_at_0.u == cplx(1.0));
    // u-(x) = sin(kx)/sin(kR): u-'(0) = k / sin(kR) = 1/sinh(pi).
    CHECK(oracle::rel_err(b.uminus_at_0.du, kInvSinhPi) < 1e-9);
    CHECK(std::abs(b.uminus_at_0.u) < 1e-14);
    CHECK(std::abs(b.uplus_at_R.u) < 1e-9);
    CHECK(oracle::rel_err(wronskian(b), kInvSinhPi) < 1e-9);

    oracle::Gen g(99);
    for (int i = 0; i < 20; ++i) {
        const cplx zz = g.cuniform(-10, 30, 0.3, 3);
        const cplx t0 = g.cuniform(0, 6.28, -0.5, 0.5);
        const cplx tR = g.cuniform(0, 6.28, -0.5, 0.5);
        const BasisEndpoints e = basis_endpoints(V, zz, t0, tR);
        CHECK(std::abs(std::cos(t0) * e.uminus_at_0.u + std::sin(t0) * e.uminus_at_0.du) <
              1e-10 * (1 + std::abs(e.uminus_at_0.du)));
        CHECK(std::abs(std::cos(tR) * e.uplus_at_R.u - std::sin(tR) * e.uplus_at_R.du) <
              1e-10 * (1 + std::abs(e.uplus_at_R.du)));
        const auto um0 = oracle::free_uminus(zz, kPi, t0, 0.0);
        const auto up0 = oracle::free_uplus(zz, kPi, tR, 0.0);
        const auto upR = oracle::free_uplus(zz, kPi, tR, kPi);
        CHECK(oracle::rel_err(e.uminus_at_0.du, um0[1]) < 1e-8);
        CHECK(oracle::rel_err(e.uplus_at_0.du, up0[1]) < 1e-8);
        // u+(R) = theta(R) + beta phi(R) cancels when u+ decays, so the error
        // scale is that of the fundamental system at R.
        const auto fR = oracle::free_fundamental(zz, kPi);
        CHECK(std::abs(e.uplus_at_R.u - upR[0]) < 1e-8 * (std::abs(upR[0]) + std::abs(fR[0])));
        (void)wronskian(e);
    }
}

TEST_CASE("basis_endpoints flags the auxiliary operator that has an eigenvalue")
{
    // Exact free data at z = 1/4, R = pi: theta = cos(pi/2), phi = sin(pi/2)/(1/2).
    FundamentalEval f;
    f.z = 0.25;
    f.x = kPi;
    f.theta = 0.0;
    f.dtheta = -0.5;
    f.phi = 2.0;
    f.dphi = 0.0;
    // theta0 = pi/2, thetaR = pi/2: H_{theta0,0} has eigenvalues (n + 1/2)^2.
    try {
        (void)basis_endpoints(f, AnglePair(kPi / 2, kPi / 2));
        FAIL("expected NearEigenvalue");
    } catch (const NearEigenvalue& e) {
        CHECK(e.which() == NearEigenvalue::Operator::LeftRobinRightDirichlet);
    }
    // theta0 = 0, thetaR = pi/2: H_{0,thetaR} = H_{0,pi/2} has eigenvalue 1/4 too,
    // and H_{theta0,0} = H_{0,0} does not.
    try {
        (void)basis_endpoints(f, AnglePair(0.0, kPi / 2));
        FAIL("expected NearEigenvalue");
    } catch (const NearEigenvalue& e) {
        CHECK(e.which() == NearEigenvalue::Operator::LeftDirichletRightRobin);
    }
}

TEST_CASE("Wronskian vanishes at eigenvalues of H and agrees across factorizations")
{
    const auto V = PotentialSpec::zero(kPi);
    // Neumann-type angles: eigenvalues n^2, while u+- exist there.
    const BasisEndpoints near = basis_endpoints(V, 1.0 + 1e-9, kPi / 2, kPi / 2);
    CHECK(std::abs(wronskian(near)) < 1e-8);
    const BasisEndpoints far = basis_endpoints(V, cplx(1.0, 1.0), kPi / 2, kPi / 2);
    CHECK(std::abs(wronskian(far)) > 1e-2);

    oracle::Gen g(5);
    for (int i = 0; i < 20; ++i) {
        const auto Vp = random_piecewise(g, 2.0, 3.0, 2.0);
        const BasisEndpoints e = basis_endpoints(Vp, g.cuniform(-5, 20, -2, 2), g.cuniform(0, 6.28, -1, 1),
                                                 g.cuniform(0, 6.28, -1, 1));
        CHECK_NOTHROW((void)wronskian(e));
    }
}
