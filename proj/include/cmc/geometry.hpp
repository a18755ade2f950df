#pragma once
#include <cmath>

#include <Eigen/Dense>

#include "cmc/ringpattern.hpp"

namespace cmc {

using Vec3 = Eigen::Vector3d;

// <x,y> = x1y1 + x2y2 - x3y3
inline double minkowski(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] - a[2] * b[2]; }

// Ambient bilinear form of a flavor: Euclidean for S^2 / R^3, Minkowski for H^2 / R^{2,1}.
inline double dot(Flavor f, const Vec3& a, const Vec3& b) {
    return f == Flavor::Spherical ? a.dot(b) : minkowski(a, b);
}
inline double sqnorm(Flavor f, const Vec3& a) { return dot(f, a, a); }
inline double norm(Flavor f, const Vec3& a) { return std::sqrt(std::abs(sqnorm(f, a))); }

// metric-adjoint cross product: dot(f, cross(f,a,b), a) = 0
inline Vec3 cross(Flavor f, const Vec3& a, const Vec3& b) {
    Vec3 c = a.cross(b);
    if (f == Flavor::Hyperbolic) c[2] = -c[2];
    return c;
}

// Geodesic distance on S^2 or H^2, accurate for nearby points.
inline double surface_distance(Flavor f, const Vec3& p, const Vec3& q) {
    Vec3 d = p - q;
    double c = std::sqrt(std::max(0.0, sqnorm(f, d))) / 2;
    return f == Flavor::Spherical ? 2 * std::asin(std::min(1.0, c)) : 2 * std::asinh(c);
}

// Unit tangent at p pointing along the geodesic toward q.
inline Vec3 tangent_toward(Flavor f, const Vec3& p, const Vec3& q) {
    double s = f == Flavor::Spherical ? 1.0 : -1.0;  // <p,p>
    Vec3 u = q - (dot(f, p, q) / s) * p;
    return u / norm(f, u);
}

// Point at signed geodesic distance t from p in unit tangent direction u.
inline Vec3 geodesic(Flavor f, const Vec3& p, const Vec3& u, double t) {
    if (f == Flavor::Spherical) return std::cos(t) * p + std::sin(t) * u;
    return std::cosh(t) * p + std::sinh(t) * u;
}

// |<a,b>| / (|a| |b|) in the ambient metric; 0 for null vectors
inline double metric_cos(Flavor f, const Vec3& a, const Vec3& b) {
    double na = norm(f, a), nb = norm(f, b);
    if (na == 0 || nb == 0) return 0.0;
    return std::abs(dot(f, a, b)) / (na * nb);
}

inline Vec3 renormalize(Flavor f, const Vec3& p) {
    if (f == Flavor::Spherical) return p.normalized();
    Vec3 x = p;
    if (x[2] < 0) x = -x;
    return x / std::sqrt(-minkowski(x, x));
}

}  // namespace cmc
