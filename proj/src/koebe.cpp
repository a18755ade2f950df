#include "cmc/koebe.hpp"
#include "cmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cmc {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double a) {
    while (a > kPi) a -= 2 * kPi;
    while (a <= -kPi) a += 2 * kPi;
    return a;
}

}  // namespace

Vec3 polygon_normal(Flavor f, const std::vector<Vec3>& pts, Vec3* centroid) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    Vec3 n = Vec3::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) n += (pts[i] - c).cross(pts[(i + 1) % pts.size()] - c);
    if (f == Flavor::Hyperbolic) n[2] = -n[2];
    if (centroid) *centroid = c;
    return n;
}

double planarity_residual(const std::vector<Vec3>& pts) {
    if (pts.size() < 4) return 0.0;
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    double diam = 0.0;
    for (const auto& p : pts) {
        M += (p - c) * (p - c).transpose();
        for (const auto& p2 : pts) diam = std::max(diam, (p - p2).norm());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
    Vec3 n = es.eigenvectors().col(0);
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, std::abs(n.dot(p - c)));
    return diam > 0 ? worst / diam : 0.0;
}

bool touches_plus(Flavor f, bool inner) { return f == Flavor::Spherical ? inner : !inner; }

const Vec3& KoebePair::tangent(int v, int b) const {
    return touches_plus(flavor, inner_at(graph(), v, b)) ? tplus[b] : tminus[b];
}

Vec3 KoebePair::extension(int v) const {
    const auto& g = graph();
    switch (g.kind[v]) {
    case VKind::S: return k[v];
    case VKind::C: return face_center[v];
    case VKind::Black:
        for (const auto& cr : g.star[v]) {
            int s = g.quads[cr.quad][0];
            return tangent(s, v);
        }
    }
    throw InvalidGraph("extension: isolated vertex");
}

PieceLength piece_length(Flavor f, double q, VKind kind, const RingRadii& rr, double var, bool inner) {
    JacobiTriple j = jacobi(var, Modulus(q));
    double sq = std::sqrt(q);
    bool s = kind == VKind::S;
    if (f == Flavor::Spherical) {
        if (s && inner) return {std::tan(rr.r) / sq, j.cn / (sq * j.sn)};
        if (s) return {sq * std::tan(rr.R), j.dn / (sq * j.sn)};
        if (inner) return {sq * std::sin(rr.r), sq * j.cn};
        return {std::sin(rr.R) / sq, j.dn / sq};
    }
    if (s && inner) return {sq * std::tanh(rr.r), sq * j.cn};
    if (s) return {std::tanh(rr.R) / sq, j.dn / sq};
    if (inner) return {std::sinh(rr.r) / sq, j.cn / (sq * j.sn)};
    return {sq * std::sinh(rr.R), j.dn / (sq * j.sn)};
}

Vec3 face_center(Flavor f, const Vec3& dual_vertex, const std::vector<Vec3>& face) {
    if (face.size() < 3) throw DegenerateFace("face_center: fewer than three vertices");
    Vec3 c;
    Vec3 n = polygon_normal(f, face, &c);
    double scale = 0.0;
    for (const auto& p : face) scale = std::max(scale, (p - c).norm());
    double den = dot(f, dual_vertex, n);
    if (n.norm() < 1e-12 * std::max(1.0, scale * scale) || std::abs(den) < 1e-14 * n.norm() * dual_vertex.norm())
        throw DegenerateFace("face_center: ill-conditioned face normal");
    return (dot(f, c, n) / den) * dual_vertex;
}

KoebePair lift(const EmbeddedRingPattern& pat, double tol) {
    const auto& g = pat.graph();
    Flavor f = pat.flavor;
    double q = pat.q, sq = std::sqrt(q);
    KoebePair kp;
    kp.flavor = f;
    kp.q = q;
    kp.pattern = pat;
    kp.rplus = 1 / sq;
    kp.rminus = sq;
    int n = g.num_vertices();
    kp.k.assign(n, Vec3::Zero());
    kp.tplus.assign(n, Vec3::Zero());
    kp.tminus.assign(n, Vec3::Zero());
    kp.face_center.assign(n, Vec3::Zero());
    kp.has_face.assign(n, 0);
    for (int v = 0; v < n; ++v) {
        if (g.is_white(v)) {
            double R = pat.radii[v].R;
            double s = f == Flavor::Spherical ? sq / std::cos(R) : 1 / (sq * std::cosh(R));
            kp.k[v] = s * pat.centers[v];
        } else {
            kp.tplus[v] = pat.touch[v] / sq;
            kp.tminus[v] = sq * pat.touch[v];
        }
    }
    // face centers of both nets: C vertices are faces of the S-net and vice versa (closed rings only)
    for (int v : g.whites) {
        Ring ring = ring_around(g, v);
        if (!ring.closed) continue;
        std::vector<Vec3> face;
        for (int w : ring.whites) face.push_back(kp.k[w]);
        kp.face_center[v] = face_center(f, kp.k[v], face);
        kp.has_face[v] = 1;
    }
    KoebeResiduals res = verify_koebe(kp);
    if (res.tangency > tol)
        throw TangencyViolation("lift: tangency residual " + std::to_string(res.tangency));
    return kp;
}

double KoebeResiduals::max() const {
    return std::max({tangency, planarity, dual_orthogonality, face_orthogonality, diagonal_orthogonality,
                     edge_length_formulas, edge_length_geometry, face_center_plane});
}

KoebeResiduals verify_koebe(const KoebePair& kp) {
    const auto& g = kp.graph();
    Flavor f = kp.flavor;
    const auto& pat = kp.pattern;
    KoebeResiduals out;
    double rp2 = f == Flavor::Spherical ? kp.rplus * kp.rplus : -kp.rplus * kp.rplus;
    double rm2 = f == Flavor::Spherical ? kp.rminus * kp.rminus : -kp.rminus * kp.rminus;
    for (int b = 0; b < g.num_vertices(); ++b) {
        if (g.is_white(b)) continue;
        out.tangency = std::max({out.tangency, std::abs(sqnorm(f, kp.tplus[b]) - rp2), std::abs(sqnorm(f, kp.tminus[b]) - rm2)});
    }
    for (int v : g.whites) {
        Ring ring = ring_around(g, v);
        // each net edge from k_v touches its sphere: k_v - t is tangent to the sphere at t
        for (int b : ring.blacks) {
            const Vec3& t = kp.tangent(v, b);
            out.tangency = std::max(out.tangency, std::abs(dot(f, kp.k[v] - t, t)));
        }
        if (ring.closed) {
            std::vector<Vec3> face;
            for (int w : ring.whites) face.push_back(kp.k[w]);
            out.planarity = std::max(out.planarity, planarity_residual(face));
            for (std::size_t i = 0; i < face.size(); ++i)
                out.face_orthogonality = std::max(out.face_orthogonality, metric_cos(f, kp.k[v], face[(i + 1) % face.size()] - face[i]));
            if (kp.has_face[v]) {
                for (const auto& p : face)
                    out.face_center_plane = std::max(out.face_center_plane, std::abs(dot(f, kp.face_center[v] - p, kp.k[v])) / norm(f, kp.k[v]));
            }
            // regularity: touching points wind once around the vertex, in the direction of the ring
            Vec3 axis = kp.k[v] / norm(f, kp.k[v]);
            Vec3 e1 = Vec3::Zero(), e2;
            double turn = 0.0, prev = 0.0;
            for (std::size_t i = 0; i <= ring.blacks.size(); ++i) {
                Vec3 d = kp.tangent(v, ring.blacks[i % ring.blacks.size()]) - kp.k[v];
                double sgn = f == Flavor::Spherical ? 1.0 : -1.0;
                d -= sgn * dot(f, d, axis) * axis;
                if (i == 0) {
                    e1 = d / norm(f, d);
                    e2 = cross(f, axis, e1);
                    e2 /= norm(f, e2);
                    continue;
                }
                double a = std::atan2(dot(f, d, e2), dot(f, d, e1));
                turn += wrap(a - prev);
                prev = a;
            }
            int winding = static_cast<int>(std::lround(turn / (2 * kPi)));
            if (std::abs(winding) != 1) ++out.regularity_violations;
        }
    }
    // per black: the two S-net neighbours span an edge through the touching point, likewise the C-net
    for (int b = 0; b < g.num_vertices(); ++b) {
        if (g.is_white(b)) continue;
        std::vector<int> ss, cs;
        for (const auto& cr : g.star[b]) {
            const auto& Q = g.quads[cr.quad];
            if (std::find(ss.begin(), ss.end(), Q[0]) == ss.end()) ss.push_back(Q[0]);
            if (std::find(cs.begin(), cs.end(), Q[2]) == cs.end()) cs.push_back(Q[2]);
        }
        auto collinear = [&](const std::vector<int>& ends) {
            if (ends.size() != 2) return;
            const Vec3& t = kp.tangent(ends[0], b);
            Vec3 a = kp.k[ends[0]] - t, c = kp.k[ends[1]] - t;
            double scale = std::max(1.0, a.norm() * c.norm());
            out.tangency = std::max(out.tangency, a.cross(c).norm() / scale);
            out.tangency = std::max(out.tangency, (kp.tangent(ends[1], b) - t).norm());
            // touching point is the foot of the perpendicular from the origin
            Vec3 e = kp.k[ends[0]] - kp.k[ends[1]];
            out.diagonal_orthogonality = std::max(out.diagonal_orthogonality, metric_cos(f, kp.pattern.touch[b], e));
        };
        collinear(ss);
        collinear(cs);
        if (ss.size() == 2 && cs.size() == 2) {
            Vec3 es = kp.k[ss[0]] - kp.k[ss[1]], ec = kp.k[cs[0]] - kp.k[cs[1]];
            out.dual_orthogonality = std::max(out.dual_orthogonality, metric_cos(f, es, ec));
        }
    }
    for (const auto& Q : g.quads) {
        int s = Q[0], c = Q[2];
        if (!kp.has_face[c]) continue;
        for (int b : {Q[1], Q[3]}) {
            for (int v : {s, c}) {
                bool inner = inner_at(g, v, b);
                PieceLength L = piece_length(f, kp.q, g.kind[v], pat.radii[v], pat.solution.var(v), inner);
                out.edge_length_formulas = std::max(out.edge_length_formulas, std::abs(L.trig - L.elliptic) / std::max(1.0, std::abs(L.elliptic)));
                Vec3 x = v == s ? kp.k[s] : kp.face_center[c];
                double measured = norm(f, kp.tangent(s, b) - x);
                out.edge_length_geometry = std::max(out.edge_length_geometry, std::abs(measured - std::abs(L.elliptic)) / std::max(1.0, std::abs(L.elliptic)));
            }
        }
    }
    return out;
}

}  // namespace cmc
