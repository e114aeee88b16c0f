#pragma once

#include <array>
#include <string>

#include "bdm/core.hpp"
#include "bdm/potential.hpp"
#include "bdm/traces.hpp"

namespace bdm {

// 4x4 matrix as 2x2 blocks [[a11, a12], [a21, a22]].
struct Block4 {
    Mat2 a11{Mat2::identity()};
    Mat2 a12{};
    Mat2 a21{};
    Mat2 a22{Mat2::identity()};

    [[nodiscard]] static Block4 identity() { return {}; }
    [[nodiscard]] static Block4 j4() { return {Mat2::zero(), -Mat2::identity(), Mat2::identity(), Mat2::zero()}; }

    [[nodiscard]] cplx at(int i, int j) const;
    [[nodiscard]] Block4 adjoint() const;
};

[[nodiscard]] Block4 operator*(const Block4& a, const Block4& b);
[[nodiscard]] Block4 operator-(const Block4& a, const Block4& b);
[[nodiscard]] double max_abs(const Block4& a);

// Gauss-Jordan with partial pivoting; SingularDenominator on a zero pivot.
[[nodiscard]] Block4 inverse(const Block4& a);

// M_A(L) = (A21 + A22 L)(A11 + A12 L)^{-1}; the inner factor must have
// condition number below max_cond.
[[nodiscard]] Mat2 moebius(const Block4& A, const Mat2& L, double max_cond = 1e8);

struct ClassA4Check {
    bool member{false};
    double residual{0.0};        // max entry of A* J4 A - J4
    double block_residual{0.0};  // the four block relations
};

[[nodiscard]] ClassA4Check in_class_A4(const Block4& A, double tol = 1e-12);

// [[A22*, -A12*], [-A21*, A11*]] times A and A times it, minus I4: equal to
// zero for members of the class, each one implying the other.
[[nodiscard]] std::array<double, 2> symplectic_inverse_residuals(const Block4& A);

// A(theta, delta) for real quads with all four angle differences nonzero mod pi.
[[nodiscard]] Block4 connector(const AngleQuad& theta, const AngleQuad& delta);

// [[C_theta, S_theta], [C_theta', S_theta']]: Lambda^{theta'}_theta = M_A(Lambda_{0,0}).
[[nodiscard]] Block4 dirichlet_reference_block(const AngleQuad& quad);

// Relative mismatch of Im M_A(L) against D^{-*} Im(L) D^{-1}, D = A11 + A12 L.
[[nodiscard]] double congruence_residual(const Block4& A, const Mat2& L);

struct LftReport {
    double theorem;            // Lambda^A against the sandwich built from Lambda^B
    double s_form{-1.0};       // Lambda^A S_A against M_{A(theta,delta)}(Lambda^B S_B); -1 if not applicable
    double robin_form{-1.0};   // Robin-to-Robin form; -1 unless both quads are Robin quads
    double dirichlet_form{-1.0};  // -1 if z is a Dirichlet eigenvalue; Lambda^A against [C' + S' Lambda_{0,0}][C + S Lambda_{0,0}]^{-1}
};

// Needs the delta differences of quadB nonzero mod pi. A singular inner factor
// raises SingularDenominator naming the bracket.
[[nodiscard]] LftReport verify_lft_relation(const PotentialSpec& V, const AngleQuad& quadA, const AngleQuad& quadB,
                                            cplx z, double tol = kDefaultTol);

}  // namespace bdm
