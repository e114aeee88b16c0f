#include "doctest.h"

#include "bdm/spectrum.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace bdm;

namespace {

const AnglePair kDD(0.0, 0.0);
const AnglePair kDN(0.0, kPi / 2);

}  // namespace

TEST_CASE("free Dirichlet and mixed spectra on [0, pi]")
{
    const auto V0 = PotentialSpec::zero(kPi);
    const auto dd = eig_selfadjoint(V0, kDD, 12);
    REQUIRE(dd.eigenvalues.size() == 12);
    for (int n = 1; n <= 12; ++n) {
        CHECK(std::abs(dd.eigenvalues[n - 1] - cplx(n * n)) < 1e-10 * n * n);
        CHECK(dd.multiplicities[n - 1] == 1);
        CHECK(dd.residuals[n - 1] < 1e-8);
    }
    const auto dn = eig_selfadjoint(V0, kDN, 8);
    for (int n = 0; n < 8; ++n) {
        const double e = (n + 0.5) * (n + 0.5);
        CHECK(std::abs(dn.eigenvalues[n].real() - e) < 1e-10 * std::max(1.0, e));
    }
    const auto nn = eig_selfadjoint(V0, AnglePair(kPi / 2, kPi / 2), 4);
    CHECK(std::abs(nn.eigenvalues[0]) < 1e-10);
    CHECK(std::abs(nn.eigenvalues[3] - 9.0) < 1e-9);
}

TEST_CASE("constant potential shifts the Dirichlet spectrum")
{
    const double c = 2.5;
    const auto V = PotentialSpec::piecewise_constant(kPi, {}, {c});
    const auto r = eig_selfadjoint(V, kDD, 6);
    for (int n = 1; n <= 6; ++n) CHECK(std::abs(r.eigenvalues[n - 1].real() - (n * n + c)) < 1e-9 * (n * n + c));
}

TEST_CASE("Robin spectra of the free problem are zeros of the closed-form determinant")
{
    oracle::Gen g(61);
    for (int i = 0; i < 5; ++i) {
        const AnglePair p(g.uniform(0.05, kPi - 0.05), g.uniform(0.05, kPi - 0.05));
        const double R = g.uniform(0.8, 3.0);
        const auto V0 = PotentialSpec::zero(R);
        const auto r = eig_selfadjoint(V0, p, 6);
        CHECK(r.eigenvalues[0].real() > eigenvalue_lower_bound(V0, p));
        for (std::size_t n = 0; n < r.eigenvalues.size(); ++n) {
            const cplx e = r.eigenvalues[n];
            if (n > 0) CHECK(e.real() > r.eigenvalues[n - 1].real());
            // Zero of the closed form to the precision of a sign change.
            const double h = 1e-8 * std::max(1.0, std::abs(e));
            const double lo = oracle::free_delta(e - h, R, p.theta0, p.thetaR).real();
            const double hi = oracle::free_delta(e + h, R, p.theta0, p.thetaR).real();
            CHECK(lo * hi < 0.0);
        }
    }
}

TEST_CASE("count_below brackets each eigenvalue")
{
    oracle::Gen g(62);
    const auto V = fixtures::random_piecewise(g, 2.0, 6.0, 0.0);
    const AnglePair p(0.4, 2.2);
    const auto r = eig_selfadjoint(V, p, 10);
    for (int n = 0; n < 10; ++n) {
        const double e = r.eigenvalues[n].real();
        const double h = 1e-6 * std::max(1.0, std::abs(e));
        CHECK(count_below(V, p, e - h) == n);
        CHECK(count_below(V, p, e + h) == n + 1);
    }
    CHECK(count_below(V, p, eigenvalue_lower_bound(V, p)) == 0);
}

TEST_CASE("Dirichlet and Dirichlet-Neumann eigenvalues interlace")
{
    oracle::Gen g(63);
    for (int i = 0; i < 4; ++i) {
        const auto V = fixtures::random_piecewise(g, g.uniform(1.0, 3.0), 8.0, 0.0);
        const auto d = eig_selfadjoint(V, kDD, 10);
        const auto m = eig_selfadjoint(V, kDN, 11);
        for (int n = 0; n < 10; ++n) {
            CHECK(m.eigenvalues[n].real() < d.eigenvalues[n].real());
            CHECK(d.eigenvalues[n].real() < m.eigenvalues[n + 1].real());
        }
    }
}

TEST_CASE("eigenvalue asymptotics for a unit-mass bump")
{
    // |V|_1 = 1 on [0, pi]: E_n ~ n^2 + 1/pi, so n (sqrt(E_n) - n) -> 1/(2 pi).
    const double R = kPi;
    const auto V = fixtures::bump(R, 2.0 / R);
    CHECK(V.l1_norm() == doctest::Approx(1.0).epsilon(1e-6));
    const auto r = eig_selfadjoint(V, kDD, 50);
    double worst = 0.0;
    for (int n = 1; n <= 50; ++n) {
        const double a = n * std::abs(std::sqrt(r.eigenvalues[n - 1].real()) * R / kPi - n);
        worst = std::max(worst, a);
    }
    CHECK(worst < 1.0);
    const double a50 = 50.0 * (std::sqrt(r.eigenvalues[49].real()) - 50.0);
    CHECK(std::abs(a50 - 1.0 / (2.0 * kPi)) < 1e-2);
}

TEST_CASE("eig_rectangle: free Dirichlet, complex shift, empty box")
{
    const auto V0 = PotentialSpec::zero(kPi);
    const auto r = eig_rectangle(V0, kDD, Rect{0.5, 4.5, -1.0, 1.0});
    REQUIRE(r.eigenvalues.size() == 2);
    CHECK(std::abs(r.eigenvalues[0] - 1.0) < 1e-10);
    CHECK(std::abs(r.eigenvalues[1] - 4.0) < 1e-10);

    const auto Vi = PotentialSpec::piecewise_constant(kPi, {}, {cplx(0.0, 1.0)});
    const auto c = eig_rectangle(Vi, kDD, Rect{0.5, 30.0, -0.7, 2.3});
    REQUIRE(c.eigenvalues.size() == 5);
    for (int n = 1; n <= 5; ++n) CHECK(std::abs(c.eigenvalues[n - 1] - cplx(n * n, 1.0)) < 1e-9 * n * n);

    const auto e = eig_rectangle(V0, kDD, Rect{-5.0, 0.5, -1.0, 1.0});
    CHECK(e.eigenvalues.empty());
    CHECK(count_zeros(V0, kDD, Rect{-5.0, 0.5, -1.0, 1.0}) == 0);
}

TEST_CASE("eig_rectangle with complex angles matches the closed form")
{
    const double R = 1.5;
    const auto V0 = PotentialSpec::zero(R);
    const AnglePair p(cplx(0.3, 0.2), cplx(1.1, -0.4));
    const Rect box{-10.0, 60.0, -6.0, 6.0};
    const auto r = eig_rectangle(V0, p, box);
    CHECK(static_cast<int>(r.eigenvalues.size()) == count_zeros(V0, p, box));
    CHECK(r.eigenvalues.size() >= 3);
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
        const cplx e = r.eigenvalues[i];
        CHECK(box.contains(e));
        const double h = 1e-6 * std::max(1.0, std::abs(e));
        const cplx d = oracle::free_delta(e, R, p.theta0, p.thetaR);
        const cplx dd = (oracle::free_delta(e + h, R, p.theta0, p.thetaR) -
                         oracle::free_delta(e - h, R, p.theta0, p.thetaR)) / (2.0 * h);
        // Newton distance to the closed-form zero.
        CHECK(std::abs(d / dd) < 1e-9 * std::max(1.0, std::abs(e)));
        if (i > 0) {
            const cplx prev = r.eigenvalues[i - 1];
            CHECK((prev.real() < e.real() || (prev.real() == e.real() && prev.imag() < e.imag())));
        }
    }
}

TEST_CASE("self-adjoint counts agree with the contour count")
{
    oracle::Gen g(64);
    for (int i = 0; i < 3; ++i) {
        const auto V = fixtures::random_piecewise(g, 2.0, 5.0, 0.0);
        const AnglePair p = fixtures::random_pair(g, 0.0);
        const auto r = eig_selfadjoint(V, p, 8);
        const double a = 0.5 * (r.eigenvalues[1].real() + r.eigenvalues[2].real());
        const double b = 0.5 * (r.eigenvalues[6].real() + r.eigenvalues[7].real());
        CHECK(count_zeros(V, p, Rect{a, b, -0.5, 0.5}) == 5);
        CHECK(eig_rectangle(V, p, Rect{a, b, -0.5, 0.5}).eigenvalues.size() == 5);
    }
}

TEST_CASE("spectrum input errors")
{
    const auto V0 = PotentialSpec::zero(kPi);
    const auto Vc = PotentialSpec::piecewise_constant(kPi, {}, {cplx(1.0, 1.0)});
    CHECK_THROWS_AS((void)eig_selfadjoint(Vc, kDD, 3), DomainError);
    CHECK_THROWS_AS((void)eig_selfadjoint(V0, AnglePair(cplx(0.0, 0.1), 0.0), 3), DomainError);
    CHECK_THROWS_AS((void)eig_selfadjoint(V0, kDD, 0), DomainError);
    CHECK_THROWS_AS((void)eig_rectangle(V0, kDD, Rect{2.0, 1.0, -1.0, 1.0}), DomainError);
    try {
        (void)eig_rectangle(V0, kDD, Rect{1.0, 5.0, -1.0, 1.0});
        FAIL("expected a contour hit at z = 1");
    } catch (const ContourHit& e) {
        CHECK(e.suggested_inflation() > 0.0);
    }
}
