#pragma once
#include <string>
#include <vector>

#include "cmc/layout.hpp"

namespace cmc {

// Primal (S) and dual (C) two-sphere Koebe nets stored over one S-quad graph.
struct KoebePair {
    Flavor flavor = Flavor::Spherical;
    double q = 0.0;
    EmbeddedRingPattern pattern;
    std::vector<Vec3> k;             // white id -> net vertex
    std::vector<Vec3> tplus;         // black id -> touching point on S^2_+
    std::vector<Vec3> tminus;        // black id -> touching point on S^2_-
    std::vector<Vec3> face_center;   // white id -> scaled dual vector (closed rings only)
    std::vector<char> has_face;      // white id -> face center defined
    double rplus = 0.0, rminus = 0.0;  // radii (spherical) or sqrt|squared radii| (hyperbolic)

    const SQuadGraph& graph() const { return pattern.graph(); }
    // touching point on the edge of the net containing white vertex v, at black b
    const Vec3& tangent(int v, int b) const;
    // central extension of the S-net: k_s, face centers at C, S-net touching points at blacks
    Vec3 extension(int v) const;
};

// Which sphere an edge touches: rings meeting with inner circles touch S^2_+ (spherical) / S^2_- (hyperbolic).
bool touches_plus(Flavor f, bool inner);

KoebePair lift(const EmbeddedRingPattern& pat, double tol = 1e-7);

// Signed length of a fundamental-piece edge from white v to its touching point at a black where
// v meets with its inner (or outer) circle: trig form from ring radii and elliptic form from the variable.
struct PieceLength {
    double trig = 0.0;
    double elliptic = 0.0;
};
PieceLength piece_length(Flavor f, double q, VKind kind, const RingRadii& rr, double var, bool inner);

// Metric normal of a polygon (Newell): <N, x - y> ~ 0 for points x, y of a planar polygon.
Vec3 polygon_normal(Flavor f, const std::vector<Vec3>& pts, Vec3* centroid = nullptr);

// Max distance of points from their best-fit plane, relative to the point-set diameter.
double planarity_residual(const std::vector<Vec3>& pts);

// Scalar multiple of the dual vertex that lies in the plane of the given face vertices.
Vec3 face_center(Flavor f, const Vec3& dual_vertex, const std::vector<Vec3>& face);

struct KoebeResiduals {
    double tangency = 0.0;
    double planarity = 0.0;
    double dual_orthogonality = 0.0;   // [k1,k3] vs [k2,k4] at each black
    double face_orthogonality = 0.0;   // dual vertex vs face
    double diagonal_orthogonality = 0.0;  // touching point vs the edge through it
    double edge_length_formulas = 0.0;    // trig vs elliptic (spherical)
    double edge_length_geometry = 0.0;    // elliptic vs measured
    double face_center_plane = 0.0;
    int regularity_violations = 0;
    double max() const;
};

KoebeResiduals verify_koebe(const KoebePair& kp);

}  // namespace cmc
