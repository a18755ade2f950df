#pragma once
#include <vector>

#include "cmc/koebe.hpp"

namespace cmc {

// Vertex-sphere radii at S vertices, face-circle radii at C vertices (by vertex id).
struct CmcRadii {
    std::vector<double> d, dstar;
    double lambda = 0.0;  // d * d*, the same for every white vertex
};

CmcRadii cmc_radii(const PatternSolution& sol);
// single vertex: (d, d*)
std::pair<double, double> cmc_radius(Flavor f, double q, VKind kind, double var);
double cmc_lambda(double q);

// Signed Koebe edge length from white v to its touching point: d + d* on vertical, d - d* on horizontal edges.
double signed_length(const CmcRadii& rad, const SQuadGraph& g, int v, int b);

struct CmcPair {
    Flavor flavor = Flavor::Spherical;
    double q = 0.0;
    KoebePair koebe;
    CmcRadii radii;
    std::vector<Vec3> c, cstar, n;  // central extension, by vertex id
    int origin = -1;
    double closure_c = 0.0, closure_cstar = 0.0;
    int worst_cycle = -1;  // quad index

    const SQuadGraph& graph() const { return koebe.graph(); }
};

// Central white vertex nearest the lattice barycentre.
int central_white(const SQuadGraph& g);

// Integrates both one-forms over a spanning tree; closure checked on every quad of the extension.
CmcPair integrate_one_forms(const KoebePair& kp, const CmcRadii& radii, double tol = 1e-7, int origin = -1);

struct DualSurface {
    std::vector<Vec3> centers;  // by vertex id, S vertices
    std::vector<double> radii;
    double closure = 0.0;
};

// Christoffel dual of S1-isothermic vertex data on G: dc* = eps * lambda * dc / (d d'), d* = lambda / d,
// with eps = +1 on horizontal and -1 on vertical edges.
DualSurface christoffel_dual(const SQuadGraph& g, const std::vector<Vec3>& c, const std::vector<double>& d,
                             double lambda, int origin, const Vec3& origin_value, double tol = 1e-7);

// Mixed area of planar polygons with parallel corresponding edges.
double mixed_area(Flavor f, const std::vector<Vec3>& P, const std::vector<Vec3>& Q);

struct CurvatureReport {
    std::vector<int> faces;  // C vertex ids
    std::vector<double> H, K;
    double closure = 0.0;
    double mean_curvature_deviation = 0.0;  // max |H - 1|
};

CurvatureReport curvatures(const CmcPair& pair);

struct CmcChecks {
    double touching = 0.0;        // primal spheres meet at the black points, collinear centres
    double touching_dual = 0.0;
    double face_circles = 0.0;    // blacks lie on the face circles
    double lambda_spread = 0.0;
    double alpha_spread = 0.0;
    double alpha = 0.0;           // -2 alpha
    double edge_normal_spread = 0.0;
    double edge_normal_h = 0.0, edge_normal_v = 0.0;  // squared lengths of t* - t per colour
    double face_normal = 0.0;
    double gauss_map = 0.0;       // |n - k|
    int timelike_normals = 0, faces_checked = 0;
};

CmcChecks cmc_checks(const CmcPair& pair);

struct LimitReport {
    std::vector<double> eps;
    std::vector<double> err_primal, err_dual;  // max relative error over S vertices
    double extrapolated_primal = 0.0, extrapolated_dual = 0.0;
    double slope_primal = 0.0, slope_dual = 0.0;  // log-log slope of error vs eps
};

// Radii asymptotics for q = 1 - eps: d -> 1/sinh(beta), d*/eps -> sinh(beta)/2 (spherical);
// d -> 1/cosh(gamma), d*/eps -> cosh(gamma)/2 (hyperbolic).
LimitReport minimal_limit(const std::vector<PatternSolution>& family, double tol = 1e-4);

// Limit-normalised surfaces of a pair at q = 1 - eps: c stays, c* is scaled by 1/eps.
std::pair<std::vector<Vec3>, std::vector<Vec3>> limit_surfaces(const CmcPair& pair);

}  // namespace cmc
