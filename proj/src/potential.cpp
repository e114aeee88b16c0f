#include "bdm/potential.hpp"

#include <algorithm>
#include <string>

namespace bdm {

namespace {

bool all_finite(const std::vector<cplx>& v)
{
    return std::all_of(v.begin(), v.end(), [](cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

bool strictly_increasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] > v[i - 1])) return false;
    }
    return true;
}

struct SegmentBuilder {
    double R;
    std::vector<Segment> operator()(const ZeroPotential&) const { return {{0.0, R, 0.0, 0.0}}; }
    std::vector<Segment> operator()(const PiecewiseConstant& p) const
    {
        std::vector<Segment> out;
        double left = 0.0;
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double right = i < p.breakpoints.size() ? p.breakpoints[i] : R;
            out.push_back({left, right, p.values[i], p.values[i]});
            left = right;
        }
        return out;
    }
    std::vector<Segment> operator()(const Sampled& s) const
    {
        std::vector<Segment> out;
        for (std::size_t i = 0; i + 1 < s.grid.size(); ++i) {
            out.push_back({s.grid[i], s.grid[i + 1], s.values[i], s.values[i + 1]});
        }
        return out;
    }
};

const std::vector<cplx>* values_of(const PotentialSpec::Rep& rep)
{
    if (const auto* p = std::get_if<PiecewiseConstant>(&rep)) return &p->values;
    if (const auto* s = std::get_if<Sampled>(&rep)) return &s->values;
    return nullptr;
}

}  // namespace

PotentialSpec::PotentialSpec(double R, Rep rep) : R_(R), rep_(std::move(rep))
{
    if (!(R > 0.0) || !std::isfinite(R)) {
        throw DomainError("interval length R must be positive and finite");
    }
    if (const auto* p = std::get_if<PiecewiseConstant>(&rep_)) {
        if (p->values.size() != p->breakpoints.size() + 1) {
            throw DomainError("piecewise_constant: need one more value than breakpoints");
        }
        if (!strictly_increasing(p->breakpoints)) {
            throw DomainError("piecewise_constant: breakpoints must be strictly increasing");
        }
        if (!p->breakpoints.empty() && (!(p->breakpoints.front() > 0.0) || !(p->breakpoints.back() < R))) {
            throw DomainError("piecewise_constant: breakpoints must lie inside (0, R)");
        }
        if (!all_finite(p->values)) throw DomainError("piecewise_constant: non-finite value");
    } else if (const auto* s = std::get_if<Sampled>(&rep_)) {
        if (s->grid.size() < 2 || s->grid.size() != s->values.size()) {
            throw DomainError("sampled: grid and values must have equal length >= 2");
        }
        if (!strictly_increasing(s->grid)) throw DomainError("sampled: grid must be strictly increasing");
        if (s->grid.front() != 0.0 || s->grid.back() != R) {
            throw DomainError("sampled: grid must start at 0 and end at R");
        }
        if (!all_finite(s->values)) throw DomainError("sampled: non-finite value");
    }
    segments_ = std::visit(SegmentBuilder{R_}, rep_);
}

bool PotentialSpec::is_real() const
{
    const auto* v = values_of(rep_);
    if (v == nullptr) return true;
    return std::all_of(v->begin(), v->end(), [](cplx c) { return c.imag() == 0.0; });
}

double PotentialSpec::max_abs() const
{
    double m = 0.0;
    if (const auto* v = values_of(rep_)) {
        for (cplx c : *v) m = std::max(m, std::abs(c));
    }
    return m;
}

double PotentialSpec::min_real() const
{
    const auto* v = values_of(rep_);
    if (v == nullptr) return 0.0;
    double m = v->front().real();
    for (cplx c : *v) m = std::min(m, c.real());
    return m;
}

double PotentialSpec::l1_norm() const
{
    // Trapezoid rule on |V| per segment; exact for piecewise-constant data and
    // for linear pieces that do not change sign.
    double sum = 0.0;
    for (const Segment& s : segments_) {
        sum += 0.5 * (s.b - s.a) * (std::abs(s.va) + std::abs(s.vb));
    }
    return sum;
}

cplx eval_potential(const PotentialSpec& V, double x)
{
    if (!(x >= 0.0 && x <= V.R())) {
        throw DomainError("eval_potential: x = " + std::to_string(x) + " outside [0, R]");
    }
    const auto& rep = V.rep();
    if (std::holds_alternative<ZeroPotential>(rep)) return 0.0;
    if (const auto* p = std::get_if<PiecewiseConstant>(&rep)) {
        const auto it = std::upper_bound(p->breakpoints.begin(), p->breakpoints.end(), x);
        return p->values[static_cast<std::size_t>(it - p->breakpoints.begin())];
    }
    const auto& s = std::get<Sampled>(rep);
    if (x >= s.grid.back()) return s.values.back();
    const auto it = std::upper_bound(s.grid.begin(), s.grid.end(), x);
    const auto i = static_cast<std::size_t>(it - s.grid.begin()) - 1;
    const double t = (x - s.grid[i]) / (s.grid[i + 1] - s.grid[i]);
    return s.values[i] + t * (s.values[i + 1] - s.values[i]);
}

FreeTrig free_trig(cplx z, double s)
{
    const double w = std::abs(z) * s * s;
    if (w < 1e-4) {
        // sin(k s)/k = s sum (-z s^2)^j/(2j+1)!, cos(k s) = sum (-z s^2)^j/(2j)!.
        const cplx q = -z * s * s;
        cplx term_s = s;
        cplx term_c = 1.0;
        cplx sinc = term_s;
        cplx cosv = term_c;
        for (int j = 1; j <= 6; ++j) {
            term_s *= q / static_cast<double>((2 * j) * (2 * j + 1));
            term_c *= q / static_cast<double>((2 * j - 1) * (2 * j));
            sinc += term_s;
            cosv += term_c;
        }
        return {sinc, cosv, 0.0};
    }
    const cplx k = sqrt_branch(z);
    const double L = k.imag() * s;
    if (L <= 30.0) {
        return {std::sin(k * s) / k, std::cos(k * s), 0.0};
    }
    const cplx ep = std::exp(kI * k * s - L);
    const cplx em = std::exp(-kI * k * s - L);
    return {(ep - em) / (2.0 * kI) / k, 0.5 * (ep + em), L};
}

cplx closed_form_f_reduced(const FreeTrig& t, cplx z, cplx alpha, cplx beta)
{
    return z * std::sin(alpha) * std::sin(beta) * t.sinc + std::sin(alpha + beta) * t.cos -
           std::cos(alpha) * std::cos(beta) * t.sinc;
}

cplx closed_form_g_reduced(const FreeTrig& t, cplx z, cplx alpha, cplx beta)
{
    return z * std::cos(alpha) * std::sin(beta) * t.sinc + std::cos(alpha + beta) * t.cos +
           std::sin(alpha) * std::cos(beta) * t.sinc;
}

cplx closed_form_f(cplx z, double s, cplx alpha, cplx beta)
{
    const FreeTrig t = free_trig(z, s);
    return sqrt_branch(z) * closed_form_f_reduced(t, z, alpha, beta) * std::exp(t.log_scale);
}

cplx closed_form_g(cplx z, double s, cplx alpha, cplx beta)
{
    const FreeTrig t = free_trig(z, s);
    return sqrt_branch(z) * closed_form_g_reduced(t, z, alpha, beta) * std::exp(t.log_scale);
}

namespace {

cplx checked_denominator(const FreeTrig& t, cplx z, cplx theta0, cplx thetaR)
{
    const cplx F = closed_form_f_reduced(t, z, theta0, thetaR);
    const double scale = std::abs(z) * std::abs(t.sinc) + std::abs(t.cos) + std::abs(t.sinc);
    if (std::abs(F) <= 1e-14 * scale) {
        throw EigenvalueHit("free problem: z is an eigenvalue (f(z,R,theta0,thetaR) = 0)");
    }
    return F;
}

}  // namespace

Mat2 oracle_bdmap_zero(cplx z, double R, cplx theta0, cplx thetaR)
{
    const FreeTrig t = free_trig(z, R);
    const cplx F = checked_denominator(t, z, theta0, thetaR);
    const cplx off = -std::exp(-t.log_scale) / F;
    return {closed_form_g_reduced(t, z, theta0, thetaR) / F, off, off,
            closed_form_g_reduced(t, z, thetaR, theta0) / F};
}

cplx oracle_green_zero(cplx z, double R, cplx theta0, cplx thetaR, double x, double xp)
{
    if (!(x >= 0.0 && x <= R && xp >= 0.0 && xp <= R)) {
        throw DomainError("oracle_green_zero: points must lie in [0, R]");
    }
    const double lo = std::min(x, xp);
    const double hi = std::max(x, xp);
    const FreeTrig t = free_trig(z, R);
    const cplx F = checked_denominator(t, z, theta0, thetaR);
    const FreeTrig t1 = free_trig(z, lo);
    const FreeTrig t2 = free_trig(z, R - hi);
    const cplx F1 = closed_form_f_reduced(t1, z, theta0, 0.0);
    const cplx F2 = closed_form_f_reduced(t2, z, 0.0, thetaR);
    return -F1 * F2 / F * std::exp(t1.log_scale + t2.log_scale - t.log_scale);
}

Mat2 transfer_matrix_piecewise(const PotentialSpec& V, cplx z, double a, double b)
{
    if (std::holds_alternative<Sampled>(V.rep())) {
        throw UnsupportedError("transfer_matrix_piecewise requires a piecewise-constant potential");
    }
    if (!(a >= 0.0 && a <= b && b <= V.R())) {
        throw DomainError("transfer_matrix_piecewise: need 0 <= a <= b <= R");
    }
    Mat2 T = Mat2::identity();
    for (const Segment& s : V.segments()) {
        const double lo = std::max(a, s.a);
        const double hi = std::min(b, s.b);
        if (!(hi > lo)) continue;
        const cplx w = z - s.va;
        const FreeTrig t = free_trig(w, hi - lo);
        const double g = std::exp(t.log_scale);
        const Mat2 P{t.cos * g, t.sinc * g, -w * t.sinc * g, t.cos * g};
        T = P * T;
    }
    return T;
}

}  // namespace bdm
