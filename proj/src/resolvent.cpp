#include "bdm/resolvent.hpp"

#include <string>

namespace bdm {

GreenKernel::GreenKernel(const PotentialSpec& V, const AnglePair& pair, cplx z, std::vector<double> nodes, double tol)
    : nodes_(std::move(nodes)), z_(z), pair_(pair)
{
    const double R = V.R();
    for (double x : nodes_) {
        if (!(x >= 0.0 && x <= R)) {
            throw DomainError("Green kernel node " + std::to_string(x) + " outside [0, R]");
        }
    }
    const cplx c0 = std::cos(pair.theta0), s0 = std::sin(pair.theta0);
    const cplx cR = std::cos(pair.thetaR), sR = std::sin(pair.thetaR);

    std::vector<double> xs = nodes_;
    xs.push_back(R);
    minus_ = sweep(V, z, {-s0, c0, 0.0}, xs, tol);
    minus_R_ = minus_.back();
    minus_.pop_back();

    xs.back() = 0.0;
    plus_ = sweep(V, z, {-sR, -cR, R}, xs, tol);
    plus_0_ = plus_.back();
    plus_.pop_back();

    delta_ = {c0 * plus_0_.u + s0 * plus_0_.du, plus_0_.exp2};
    if (char_det_negligible(delta_, z, R)) {
        throw EigenvalueHit("z is an eigenvalue of H_{theta0,thetaR}");
    }
    // The same Wronskian read off at x = R from the other sweep.
    const ScaledValue at_R{cR * minus_R_.u - sR * minus_R_.du, minus_R_.exp2};
    const cplx ratio = ldexp(at_R.value / delta_.value, at_R.exp2 - delta_.exp2);
    if (!(std::abs(ratio - 1.0) < 1e-6)) {
        throw IntegrationAccuracyError("Green kernel Wronskians disagree: ratio " + std::to_string(std::abs(ratio)));
    }
}

cplx GreenKernel::combine(cplx a, int ea, cplx b, int eb) const
{
    return ldexp(a * b / delta_.value, ea + eb - delta_.exp2);
}

cplx GreenKernel::wedge(std::size_t i, std::size_t j) const
{
    return combine(minus_[i].u, minus_[i].exp2, plus_[j].u, plus_[j].exp2);
}

cplx GreenKernel::wedge_d1(std::size_t i, std::size_t j) const
{
    return combine(minus_[i].du, minus_[i].exp2, plus_[j].u, plus_[j].exp2);
}

cplx GreenKernel::wedge_d2(std::size_t i, std::size_t j) const
{
    return combine(minus_[i].u, minus_[i].exp2, plus_[j].du, plus_[j].exp2);
}

cplx GreenKernel::wedge_d12(std::size_t i, std::size_t j) const
{
    return combine(minus_[i].du, minus_[i].exp2, plus_[j].du, plus_[j].exp2);
}

cplx GreenKernel::value(std::size_t i, std::size_t j) const
{
    return nodes_[i] <= nodes_[j] ? wedge(i, j) : wedge(j, i);
}

GreenEval GreenKernel::eval(std::size_t i, std::size_t j) const
{
    GreenEval g;
    g.value = value(i, j);
    g.z = z_;
    g.x = nodes_[i];
    g.xp = nodes_[j];
    g.side = g.x < g.xp ? GreenSide::Below : (g.x > g.xp ? GreenSide::Above : GreenSide::Diagonal);
    return g;
}

CauchyData GreenKernel::plus_over_delta(std::size_t i) const
{
    const int e = plus_[i].exp2 - delta_.exp2;
    return {ldexp(plus_[i].u / delta_.value, e), ldexp(plus_[i].du / delta_.value, e), nodes_[i]};
}

CauchyData GreenKernel::minus_over_delta(std::size_t i) const
{
    const int e = minus_[i].exp2 - delta_.exp2;
    return {ldexp(minus_[i].u / delta_.value, e), ldexp(minus_[i].du / delta_.value, e), nodes_[i]};
}

CauchyData GreenKernel::psi_plus_at_0() const
{
    return {ldexp(plus_0_.u, plus_0_.exp2), ldexp(plus_0_.du, plus_0_.exp2), 0.0};
}

CauchyData GreenKernel::psi_minus_at_R() const
{
    return {ldexp(minus_R_.u, minus_R_.exp2), ldexp(minus_R_.du, minus_R_.exp2), 0.0};
}

GreenEval green(const PotentialSpec& V, const AnglePair& pair, cplx z, double x, double xp, double tol)
{
    const GreenKernel k(V, pair, z, {x, xp}, tol);
    return k.eval(0, 1);
}

std::vector<CauchyData> FunctionEvaluator::eval(std::span<const double> xs) const
{
    std::vector<CauchyData> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i].x = xs[i];
    for (const SolutionTerm& t : terms_) {
        const auto s = sweep(*t.V, t.z, t.anchor, xs, t.tol);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out[i].u += ldexp(t.factor * s[i].u, t.exp2 + s[i].exp2);
            out[i].du += ldexp(t.factor * s[i].du, t.exp2 + s[i].exp2);
        }
    }
    return out;
}

cplx FunctionEvaluator::operator()(double x) const
{
    const double xs[1] = {x};
    return eval(xs)[0].u;
}

BoundaryValues FunctionEvaluator::boundary_values(double R) const
{
    const double xs[2] = {0.0, R};
    const auto e = eval(xs);
    return {e[0].u, e[0].du, e[1].u, e[1].du};
}

namespace {

struct Anchors {
    std::shared_ptr<const PotentialSpec> V;
    CauchyData plus;   // psi+ at R
    CauchyData minus;  // psi- at 0
    ScaledValue delta;
};

Anchors anchors(const PotentialSpec& V, const AnglePair& pair, cplx z, double tol)
{
    const GreenKernel k(V, pair, z, {}, tol);
    return {std::make_shared<const PotentialSpec>(V),
            {-std::sin(pair.thetaR), -std::cos(pair.thetaR), V.R()},
            {-std::sin(pair.theta0), std::cos(pair.theta0), 0.0},
            k.delta()};
}

SolutionTerm term(const Anchors& a, const CauchyData& anchor, cplx z, double tol, cplx numerator)
{
    return {a.V, z, tol, anchor, numerator / a.delta.value, -a.delta.exp2};
}

bool angle_changed(cplx from, cplx to) { return std::abs(std::sin(to - from)) > 1e-14; }

}  // namespace

ResolventRows gamma_resolvent_rows(const PotentialSpec& V, const AnglePair& pair, const AnglePair& primed, cplx z,
                                   double tol)
{
    const Anchors a = anchors(V, pair, z, tol);
    const cplx s0 = std::sin(primed.theta0 - pair.theta0);
    const cplx sR = std::sin(primed.thetaR - pair.thetaR);
    ResolventRows rows;
    rows.k1 = FunctionEvaluator({term(a, a.plus, z, tol, s0)});
    rows.k2 = FunctionEvaluator({term(a, a.minus, z, tol, sR)});

    // The u+- form: k1 = [sin/W] c0 u+, k2 = [sin/W] cR u-, with
    // c0 = -u-(0)/sin theta0 = u-'(0)/cos theta0 and
    // cR = -u+(R)/sin thetaR = -u+'(R)/cos thetaR.
    try {
        const BasisEndpoints b = basis_endpoints(V, z, pair.theta0, pair.thetaR, tol);
        const cplx c0 = std::cos(pair.theta0), sn0 = std::sin(pair.theta0);
        const cplx cR = std::cos(pair.thetaR), snR = std::sin(pair.thetaR);
        auto pick = [&rows](cplx num1, cplx den1, cplx num2, cplx den2) {
            const cplx a = num1 / den1, b = num2 / den2;
            if (std::abs(den1) > 1e-8 && std::abs(den2) > 1e-8) {
                rows.form_spread = std::max(rows.form_spread, std::abs(a - b) / std::abs(a));
            }
            return std::abs(den1) >= std::abs(den2) ? a : b;
        };
        rows.c0 = pick(-b.uminus_at_0.u, sn0, b.uminus_at_0.du, c0);
        rows.cR = pick(-b.uplus_at_R.u, snR, -b.uplus_at_R.du, cR);
        rows.basis_checked = true;
    } catch (const NumericalError&) {
        rows.basis_checked = false;
    }
    return rows;
}

FunctionEvaluator adjoint_trace_kernel(const PotentialSpec& V, const AnglePair& pair, const AnglePair& primed,
                                       cplx z, std::array<cplx, 2> v, double tol)
{
    const Anchors a = anchors(V, pair, z, tol);
    const cplx s0 = std::sin(primed.theta0 - pair.theta0);
    const cplx sR = std::sin(primed.thetaR - pair.thetaR);
    std::vector<SolutionTerm> terms;
    if (v[0] * s0 != cplx(0.0)) terms.push_back(term(a, a.plus, z, tol, v[0] * s0));
    if (v[1] * sR != cplx(0.0)) terms.push_back(term(a, a.minus, z, tol, v[1] * sR));
    return FunctionEvaluator(std::move(terms));
}

cplx RankTwoKernel::operator()(double x, double xp) const
{
    const double xs[1] = {x};
    const double xps[1] = {xp};
    return grid(xs, xps)[0];
}

std::vector<cplx> RankTwoKernel::grid(std::span<const double> xs, std::span<const double> xps) const
{
    const auto l0 = left[0].eval(xs);
    const auto l1 = left[1].eval(xs);
    const auto r0 = right[0].eval(xps);
    const auto r1 = right[1].eval(xps);
    std::vector<cplx> out(xs.size() * xps.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < xps.size(); ++j) {
            const std::array<cplx, 2> r{r0[j].u, r1[j].u};
            const auto cr = coupling * r;
            out[i * xps.size() + j] = l0[i].u * cr[0] + l1[i].u * cr[1];
        }
    }
    return out;
}

KreinKernel krein_kernel(const PotentialSpec& V, const AnglePair& pair, const AnglePair& primed, cplx z,
                         double tol)
{
    KreinKernel out;
    const bool left_changed = angle_changed(pair.theta0, primed.theta0);
    const bool right_changed = angle_changed(pair.thetaR, primed.thetaR);
    if (!left_changed && !right_changed) {
        out.which = KreinCase::Unchanged;
        return out;
    }
    const FundamentalEval f = fundamental_system(V, z, V.R(), tol);
    if (char_det_negligible(char_det_scaled(f, primed.theta0, primed.thetaR), z, V.R())) {
        throw EigenvalueHit("z is an eigenvalue of H_{theta0',thetaR'}");
    }
    const AngleQuad quad{pair, primed};
    const Mat2 lambda_inv = inverse(bdmap_from_fundamental(f, quad).matrix);

    out.kernel.left = {adjoint_trace_kernel(V, pair, primed, z, {1.0, 0.0}, tol),
                       adjoint_trace_kernel(V, pair, primed, z, {0.0, 1.0}, tol)};
    const ResolventRows rows = gamma_resolvent_rows(V, pair, primed, z, tol);
    out.kernel.right = {rows.k1, rows.k2};

    const Mat2 S = diag_sin(quad);
    if (left_changed && right_changed) {
        out.which = KreinCase::BothChanged;
        out.kernel.coupling = inverse(S) * lambda_inv;
    } else if (right_changed) {
        out.which = KreinCase::RightChanged;
        const Mat2 P2 = Mat2::diag(0.0, 1.0);
        out.kernel.coupling = (1.0 / S(1, 1)) * (P2 * lambda_inv * P2);
    } else {
        out.which = KreinCase::LeftChanged;
        const Mat2 P1 = Mat2::diag(1.0, 0.0);
        out.kernel.coupling = (1.0 / S(0, 0)) * (P1 * lambda_inv * P1);
    }
    return out;
}

KreinValue krein_correction(const PotentialSpec& V, const AnglePair& pair, const AnglePair& primed, cplx z, double x,
                            double xp, double tol)
{
    const KreinKernel k = krein_kernel(V, pair, primed, z, tol);
    if (k.which == KreinCase::Unchanged) return {0.0, KreinCase::Unchanged};
    return {k.kernel(x, xp), k.which};
}

}  // namespace bdm
