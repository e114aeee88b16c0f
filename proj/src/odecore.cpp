#include "bdm/odecore.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace bdm {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr int kUnscaledLimit = 900;
constexpr long kMaxSteps = 20'000'000;
// Per-step tolerance as a fraction of the requested one, so that the global
// error over a few hundred steps stays near tol.
constexpr double kLocalTolFactor = 0.05;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Vec2 {
    cplx u;
    cplx w;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.u + b.u, a.w + b.w}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.u, s * a.w}; }

inline double vmax(Vec2 a) { return std::max(std::abs(a.u), std::abs(a.w)); }

// Rescales v to unit size by a power of two and returns the exponent removed.
int renormalize(Vec2& v)
{
    const double m = vmax(v);
    if (m == 0.0 || !std::isfinite(m)) return 0;
    int e = 0;
    (void)std::frexp(m, &e);
    if (e == 0) return 0;
    v.u = ldexp(v.u, -e);
    v.w = ldexp(v.w, -e);
    return e;
}

}  // namespace

cplx ldexp(cplx v, int e) { return {std::ldexp(v.real(), e), std::ldexp(v.imag(), e)}; }

double ScaledValue::log_abs() const { return std::log(std::abs(value)) + exp2 * kLn2; }

cplx ScaledValue::unscaled() const { return ldexp(value, exp2); }

Propagator::Propagator(const PotentialSpec& V, cplx z, double tol)
    : V_(&V), z_(z), tol_(kLocalTolFactor * tol), kappa_(std::max(1.0, std::sqrt(std::abs(z) + V.max_abs())))
{
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
}

void Propagator::advance(std::span<ScaledSolution> cols, double from, double to)
{
    const double R = V_->R();
    if (!(from >= 0.0 && from <= R && to >= 0.0 && to <= R)) {
        throw DomainError("propagate: points must lie in [0, R]");
    }
    if (from == to) return;
    const auto& segs = V_->segments();
    if (to > from) {
        for (const Segment& s : segs) {
            const double lo = std::max(from, s.a);
            const double hi = std::min(to, s.b);
            if (hi > lo) integrate_piece(cols, lo, hi, s);
        }
    } else {
        for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
            const double hi = std::min(from, it->b);
            const double lo = std::max(to, it->a);
            if (hi > lo) integrate_piece(cols, hi, lo, *it);
        }
    }
}

void Propagator::integrate_piece(std::span<ScaledSolution> cols, double t0, double t1, const Segment& seg)
{
    const std::size_t n = cols.size();
    const double kap = kappa_;
    const cplx slope = (seg.vb - seg.va) / (seg.b - seg.a);
    auto rhs = [&](double t, Vec2 y) -> Vec2 {
        const cplx q = seg.va + slope * (t - seg.a) - z_;
        return {kap * y.w, q * y.u / kap};
    };

    std::vector<Vec2> y(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yn(n);
    std::vector<int> ex(n);
    for (std::size_t c = 0; c < n; ++c) {
        y[c] = {cols[c].u, cols[c].du / kap};
        ex[c] = cols[c].exp2 + renormalize(y[c]);
    }

    const double span = std::abs(t1 - t0);
    const double dir = t1 > t0 ? 1.0 : -1.0;
    if (h_ <= 0.0) {
        const double k_loc = std::sqrt(std::abs(z_ - seg.va)) + 1.0;
        h_ = std::min(span, 0.2 / k_loc);
    }
    double h = std::min(h_, span);
    double t = t0;
    for (std::size_t c = 0; c < n; ++c) k1[c] = rhs(t, y[c]);

    while (true) {
        const double remaining = std::abs(t1 - t);
        if (remaining == 0.0) break;
        bool last = false;
        if (h >= remaining * (1.0 - 1e-12)) {
            h = remaining;
            last = true;
        }
        const double hs = dir * h;
        double err = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const Vec2 yc = y[c];
            k2[c] = rhs(t + c2 * hs, yc + (hs * a21) * k1[c]);
            k3[c] = rhs(t + c3 * hs, yc + (hs * a31) * k1[c] + (hs * a32) * k2[c]);
            k4[c] = rhs(t + c4 * hs, yc + (hs * a41) * k1[c] + (hs * a42) * k2[c] + (hs * a43) * k3[c]);
            k5[c] = rhs(t + c5 * hs, yc + (hs * a51) * k1[c] + (hs * a52) * k2[c] + (hs * a53) * k3[c] +
                                         (hs * a54) * k4[c]);
            k6[c] = rhs(t + hs, yc + (hs * a61) * k1[c] + (hs * a62) * k2[c] + (hs * a63) * k3[c] +
                                    (hs * a64) * k4[c] + (hs * a65) * k5[c]);
            yn[c] = yc + (hs * b1) * k1[c] + (hs * b3) * k3[c] + (hs * b4) * k4[c] + (hs * b5) * k5[c] +
                    (hs * b6) * k6[c];
            k7[c] = rhs(t + hs, yn[c]);
            const Vec2 e = (hs * e1) * k1[c] + (hs * e3) * k3[c] + (hs * e4) * k4[c] + (hs * e5) * k5[c] +
                           (hs * e6) * k6[c] + (hs * e7) * k7[c];
            const double su = tol_ * (1.0 + std::max(std::abs(yc.u), std::abs(yn[c].u)));
            const double sw = tol_ * (1.0 + std::max(std::abs(yc.w), std::abs(yn[c].w)));
            err = std::max({err, std::abs(e.u) / su, std::abs(e.w) / sw});
        }
        if (!std::isfinite(err)) err = 1e10;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (err <= 1.0) {
            t = last ? t1 : t + hs;
            for (std::size_t c = 0; c < n; ++c) {
                y[c] = yn[c];
                const int e = renormalize(y[c]);
                ex[c] += e;
                k1[c] = e == 0 ? k7[c] : rhs(t, y[c]);
            }
            if (++steps_ > kMaxSteps) throw StiffnessError("propagate: step budget exhausted");
            if (!last) h_ = h * fac;
            h = h * fac;
            if (last) break;
        } else {
            h *= std::min(fac, 0.9);
            if (h < 1e-13 * std::max(1.0, std::abs(t))) {
                throw StiffnessError("propagate: step size underflow near x = " + std::to_string(t));
            }
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        cols[c] = {y[c].u, y[c].w * kap, ex[c]};
    }
}

CauchyData propagate(const PotentialSpec& V, cplx z, const CauchyData& from, double to_x, double tol)
{
    Propagator p(V, z, tol);
    ScaledSolution s{from.u, from.du, 0};
    p.advance(std::span<ScaledSolution>(&s, 1), from.x, to_x);
    return {ldexp(s.u, s.exp2), ldexp(s.du, s.exp2), to_x};
}

std::vector<ScaledSolution> sweep(const PotentialSpec& V, cplx z, const CauchyData& from, std::span<const double> xs,
                                  double tol)
{
    std::vector<ScaledSolution> out(xs.size());
    std::vector<std::size_t> right, left;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        (xs[i] >= from.x ? right : left).push_back(i);
    }
    std::sort(right.begin(), right.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::sort(left.begin(), left.end(), [&](std::size_t a, std::size_t b) { return xs[a] > xs[b]; });
    Propagator p(V, z, tol);
    for (const auto* order : {&right, &left}) {
        ScaledSolution s{from.u, from.du, 0};
        double x = from.x;
        for (std::size_t i : *order) {
            p.advance(std::span<ScaledSolution>(&s, 1), x, xs[i]);
            x = xs[i];
            out[i] = s;
        }
    }
    return out;
}

std::vector<CauchyData> propagate_many(const PotentialSpec& V, cplx z, const CauchyData& from,
                                       std::span<const double> xs, double tol)
{
    const auto s = sweep(V, z, from, xs, tol);
    std::vector<CauchyData> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out[i] = {ldexp(s[i].u, s[i].exp2), ldexp(s[i].du, s[i].exp2), xs[i]};
    }
    return out;
}

FundamentalEval fundamental_system(const PotentialSpec& V, cplx z, double x, double tol)
{
    Propagator p(V, z, tol);
    ScaledSolution cols[2] = {{1.0, 0.0, 0}, {0.0, 1.0, 0}};
    p.advance(cols, 0.0, x);
    const int E = std::max(cols[0].exp2, cols[1].exp2);
    const int shift = (E > kUnscaledLimit || E < -kUnscaledLimit) ? E : 0;
    FundamentalEval f;
    f.theta = ldexp(cols[0].u, cols[0].exp2 - shift);
    f.dtheta = ldexp(cols[0].du, cols[0].exp2 - shift);
    f.phi = ldexp(cols[1].u, cols[1].exp2 - shift);
    f.dphi = ldexp(cols[1].du, cols[1].exp2 - shift);
    f.z = z;
    f.x = x;
    f.exp2 = shift;
    return f;
}

ScaledValue char_det_scaled(const FundamentalEval& f, cplx theta0, cplx thetaR)
{
    const cplx c0 = std::cos(theta0), s0 = std::sin(theta0);
    const cplx cR = std::cos(thetaR), sR = std::sin(thetaR);
    const cplx d = c0 * cR * f.phi - c0 * sR * f.dphi - s0 * cR * f.theta + s0 * sR * f.dtheta;
    return {d, f.exp2};
}

cplx char_det(const PotentialSpec& V, cplx z, cplx theta0, cplx thetaR, double tol)
{
    return char_det_scaled(fundamental_system(V, z, V.R(), tol), theta0, thetaR).unscaled();
}

bool char_det_negligible(const ScaledValue& delta, cplx z, double R)
{
    if (delta.value == cplx(0.0)) return true;
    const double bound =
        std::log(1e-12) + 0.5 * std::log(std::max(1.0, std::abs(z))) + sqrt_branch(z).imag() * R;
    return delta.log_abs() < bound;
}

BasisEndpoints basis_endpoints(const FundamentalEval& f, const AnglePair& pair)
{
    const cplx c0 = std::cos(pair.theta0), s0 = std::sin(pair.theta0);
    const cplx cR = std::cos(pair.thetaR), sR = std::sin(pair.thetaR);
    const double R = f.x;

    // Delta(z,R,theta0,0) normalizes u-, Delta(z,R,0,thetaR) normalizes u+.
    const ScaledValue dm{c0 * f.phi - s0 * f.theta, f.exp2};
    const ScaledValue dp{cR * f.phi - sR * f.dphi, f.exp2};
    if (char_det_negligible(dm, f.z, R)) {
        throw NearEigenvalue(NearEigenvalue::Operator::LeftRobinRightDirichlet,
                             "u- undefined: z is an eigenvalue of H_{theta0,0}");
    }
    if (char_det_negligible(dp, f.z, R)) {
        throw NearEigenvalue(NearEigenvalue::Operator::LeftDirichletRightRobin,
                             "u+ undefined: z is an eigenvalue of H_{0,thetaR}");
    }

    BasisEndpoints b;
    b.z = f.z;
    b.angles = pair;
    const cplx inv = ldexp(1.0 / dm.value, -f.exp2);
    b.uminus_at_0 = {-s0 * inv, c0 * inv, 0.0};
    b.uminus_at_R = {1.0, (-s0 * f.dtheta + c0 * f.dphi) / dm.value, R};

    const cplx beta = -(cR * f.theta - sR * f.dtheta) / dp.value;
    b.uplus_at_0 = {1.0, beta, 0.0};
    b.uplus_at_R = {ldexp(f.theta + beta * f.phi, f.exp2), ldexp(f.dtheta + beta * f.dphi, f.exp2), R};
    return b;
}

BasisEndpoints basis_endpoints(const PotentialSpec& V, cplx z, cplx theta0, cplx thetaR, double tol)
{
    return basis_endpoints(fundamental_system(V, z, V.R(), tol), AnglePair(theta0, thetaR));
}

cplx wronskian(const BasisEndpoints& b)
{
    const cplx w0 = b.uplus_at_0.u * b.uminus_at_0.du - b.uplus_at_0.du * b.uminus_at_0.u;
    const cplx wR = b.uplus_at_R.u * b.uminus_at_R.du - b.uplus_at_R.du * b.uminus_at_R.u;

    const cplx c0 = std::cos(b.angles.theta0), s0 = std::sin(b.angles.theta0);
    const cplx cR = std::cos(b.angles.thetaR), sR = std::sin(b.angles.thetaR);
    const cplx left = (-s0 * b.uminus_at_0.u + c0 * b.uminus_at_0.du) * (c0 + s0 * b.uplus_at_0.du);
    const cplx right = (cR - sR * b.uminus_at_R.du) * (-sR * b.uplus_at_R.u - cR * b.uplus_at_R.du);

    const double scale = std::max({std::abs(w0), std::abs(wR), std::abs(left), std::abs(right)});
    const double spread = std::max({std::abs(w0 - wR), std::abs(w0 - left), std::abs(w0 - right)});
    if (spread > 1e-7 * scale) {
        throw IntegrationAccuracyError("Wronskian evaluations disagree: relative spread " +
                                       std::to_string(spread / scale));
    }
    return w0;
}

}  // namespace bdm
