#pragma once
#include <utility>
#include <vector>

namespace cmc {

// Modulus q in (0,1]; m = q^2 is the parameter.
struct Modulus {
    double q;
    double k2;
    double K;       // +inf for q = 1
    double Kprime;

    explicit Modulus(double q);
    bool degenerate() const { return q == 1.0; }
};

std::pair<double, double> quarter_periods(double q);

struct JacobiTriple {
    double sn, cn, dn;
};

JacobiTriple jacobi(double x, const Modulus& m);

// g(x) = arg-continuous arctan((1+q) sn(x/2) / (cn(x/2) dn(x/2))); odd, g(x+4K) = g(x) + pi.
double kernel_g(double x, const Modulus& m);
// g'(x) = (dn x + q cn x) / 2
double kernel_g_prime(double x, const Modulus& m);
// F(x) = int_0^x g, adaptive Gauss-Legendre; domain |x| <= 4K.
double kernel_F(double x, const Modulus& m);

// Per-q cache of g, g', F. F is tabulated on a uniform grid over [0, 4K] and
// completed by a fixed Gauss-Legendre panel; immutable after construction.
class Kernel {
public:
    explicit Kernel(double q);
    const Modulus& modulus() const { return m_; }
    double q() const { return m_.q; }
    double K() const { return m_.K; }
    double g(double x) const { return kernel_g(x, m_); }
    double dg(double x) const { return kernel_g_prime(x, m_); }
    double F(double x) const;

private:
    Modulus m_;
    double h_ = 0.0;
    double range_ = 0.0;
    std::vector<double> table_;
};

}  // namespace cmc
