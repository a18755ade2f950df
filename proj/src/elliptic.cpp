#include "cmc/elliptic.hpp"
#include "cmc/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace cmc {

namespace {

constexpr double kPi = std::numbers::pi;

double agm(double a, double b) {
    for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
        double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return 0.5 * (a + b);
}

// complementary modulus sqrt(1-q^2) without cancellation near q = 1
double complement(double q) { return std::sqrt((1.0 - q) * (1.0 + q)); }

template <int N>
struct GaussLegendre {
    std::array<double, N> x{}, w{};
    GaussLegendre() {
        for (int i = 0; i < N; ++i) {
            double z = std::cos(kPi * (i + 0.75) / (N + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = z;
                for (int k = 2; k <= N; ++k) {
                    double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = N * (z * p1 - p0) / (z * z - 1.0);
                double dz = p1 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) {
                    x[i] = z;
                    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                    break;
                }
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
            }
        }
    }
};

const GaussLegendre<20>& gl20() {
    static const GaussLegendre<20> rule;
    return rule;
}

double panel(double a, double b, const Modulus& m) {
    const auto& r = gl20();
    double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
    for (int i = 0; i < 20; ++i) s += r.w[i] * kernel_g(c + h * r.x[i], m);
    return s * h;
}

double adaptive(double a, double b, double whole, const Modulus& m, double tol, int depth) {
    double c = 0.5 * (a + b);
    double left = panel(a, c, m), right = panel(c, b, m);
    if (depth > 40 || std::abs(left + right - whole) <= tol) return left + right;
    return adaptive(a, c, left, m, 0.5 * tol, depth + 1) +
           adaptive(c, b, right, m, 0.5 * tol, depth + 1);
}

double integrate_g(double a, double b, const Modulus& m) {
    // panels of width <= 0.5 keep the 20-point rule at machine precision
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / 0.5)));
    double h = (b - a) / n, s = 0.0;
    for (int i = 0; i < n; ++i) {
        double lo = a + i * h, hi = lo + h;
        s += adaptive(lo, hi, panel(lo, hi, m), m, 1e-14, 0);
    }
    return s;
}

constexpr double kDegenerateRange = 60.0;

}  // namespace

Modulus::Modulus(double q_) : q(q_), k2(q_ * q_) {
    if (!(q > 0.0) || q > 1.0) throw DomainError("modulus q must lie in (0,1]");
    auto [k, kp] = quarter_periods(q);
    K = k;
    Kprime = kp;
}

std::pair<double, double> quarter_periods(double q) {
    if (!(q > 0.0) || q > 1.0) throw DomainError("modulus q must lie in (0,1]");
    double kp = kPi / (2.0 * agm(1.0, q));
    if (q == 1.0) return {std::numeric_limits<double>::infinity(), kp};
    return {kPi / (2.0 * agm(1.0, complement(q))), kp};
}

JacobiTriple jacobi(double x, const Modulus& m) {
    if (m.degenerate()) {
        double s = 1.0 / std::cosh(x);
        return {std::tanh(x), s, s};
    }
    // descending Landen sequence seeded by the AGM
    std::array<double, 32> a{}, c{};
    a[0] = 1.0;
    double b = complement(m.q);
    c[0] = m.q;
    int n = 0;
    while (std::abs(c[n]) > 1e-17 && n < 31) {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = std::sqrt(a[n] * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * x, n);
    for (int i = n; i > 0; --i) phi = 0.5 * (phi + std::asin(c[i] / a[i] * std::sin(phi)));
    double sn = std::sin(phi), cn = std::cos(phi);
    // dn^2 = q'^2 + q^2 cn^2 avoids the cancellation in 1 - q^2 sn^2
    double qp = complement(m.q);
    return {sn, cn, std::sqrt(qp * qp + m.k2 * cn * cn)};
}

double kernel_g(double x, const Modulus& m) {
    if (m.degenerate()) return std::atan(std::sinh(x));
    // reduce to |x0| <= 2K where cn(x0/2) >= 0 and the principal branch is continuous
    double n = std::round(x / (4.0 * m.K));
    double x0 = x - 4.0 * m.K * n;
    JacobiTriple j = jacobi(0.5 * x0, m);
    return std::atan2((1.0 + m.q) * j.sn, j.cn * j.dn) + n * kPi;
}

double kernel_g_prime(double x, const Modulus& m) {
    JacobiTriple j = jacobi(x, m);
    return 0.5 * (j.dn + m.q * j.cn);
}

double kernel_F(double x, const Modulus& m) {
    if (!std::isfinite(x)) throw DomainError("kernel_F: non-finite argument");
    if (!m.degenerate() && std::abs(x) > 4.0 * m.K * (1.0 + 1e-12))
        throw DomainError("kernel_F: argument outside [-4K, 4K]");
    // g is odd, so F is even
    double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    return integrate_g(0.0, ax, m);
}

Kernel::Kernel(double q) : m_(q) {
    range_ = m_.degenerate() ? kDegenerateRange : 4.0 * m_.K;
    int n = std::max(8, static_cast<int>(std::ceil(range_ / 0.25)));
    h_ = range_ / n;
    table_.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) table_[i + 1] = table_[i] + integrate_g(i * h_, (i + 1) * h_, m_);
}

double Kernel::F(double x) const {
    double ax = std::abs(x);
    if (!std::isfinite(x)) throw DomainError("Kernel::F: non-finite argument");
    if (ax > range_) {
        if (!m_.degenerate() && ax > range_ * (1.0 + 1e-12))
            throw DomainError("Kernel::F: argument outside [-4K, 4K]");
        if (m_.degenerate()) return table_.back() + 0.5 * kPi * (ax - range_);
        ax = range_;
    }
    auto i = static_cast<std::size_t>(ax / h_);
    if (i >= table_.size() - 1) i = table_.size() - 2;
    double lo = i * h_;
    return table_[i] + (ax > lo ? panel(lo, ax, m_) : 0.0) - (ax < lo ? panel(ax, lo, m_) : 0.0);
}

}  // namespace cmc
