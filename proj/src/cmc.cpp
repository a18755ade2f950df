#include "cmc/cmc.hpp"
#include "cmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace cmc {

namespace {

// Edges (white, black) of the central extension with their quad.
std::vector<std::vector<int>> extension_adjacency(const SQuadGraph& g) {
    std::vector<std::vector<int>> adj(g.num_vertices());
    for (const auto& Q : g.quads) {
        for (int i = 0; i < 4; ++i) {
            int a = Q[i], b = Q[(i + 1) % 4];
            if (std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end()) {
                adj[a].push_back(b);
                adj[b].push_back(a);
            }
        }
    }
    return adj;
}

// the two S vertices joined through black b (an edge of G); fewer on degenerate boundaries
std::vector<int> s_neighbors(const SQuadGraph& g, int b) {
    std::vector<int> out;
    for (const auto& cr : g.star[b]) {
        int s = g.quads[cr.quad][0];
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    return out;
}

double collinearity(const Vec3& a, const Vec3& m, const Vec3& b) {
    Vec3 u = a - m, v = b - m;
    return u.cross(v).norm() / std::max(1.0, u.norm() + v.norm());
}

}  // namespace

double cmc_lambda(double q) { return (1 - q * q) / (4 * q); }

std::pair<double, double> cmc_radius(Flavor f, double q, VKind kind, double var) {
    JacobiTriple j = jacobi(var, Modulus(q));
    double h = 1 / (2 * std::sqrt(q));
    // spherical S vertices and Lorentz C vertices share the sn-quotient form
    bool quotient = (kind == VKind::S) == (f == Flavor::Spherical);
    if (quotient) {
        if (j.sn == 0) throw DomainError("cmc_radius: sn vanishes");
        return {h * (j.dn + j.cn) / j.sn, h * (j.dn - j.cn) / j.sn};
    }
    return {h * (j.dn + q * j.cn), h * (j.dn - q * j.cn)};
}

CmcRadii cmc_radii(const PatternSolution& sol) {
    const auto& g = *sol.graph;
    CmcRadii out;
    out.d.assign(g.num_vertices(), 0.0);
    out.dstar.assign(g.num_vertices(), 0.0);
    out.lambda = cmc_lambda(sol.q);
    for (int v : g.whites) std::tie(out.d[v], out.dstar[v]) = cmc_radius(sol.flavor, sol.q, g.kind[v], sol.var(v));
    return out;
}

double signed_length(const CmcRadii& rad, const SQuadGraph& g, int v, int b) {
    return g.edge_color(v, b) == EdgeColor::Vertical ? rad.d[v] + rad.dstar[v] : rad.d[v] - rad.dstar[v];
}

int central_white(const SQuadGraph& g) {
    int best = -1;
    if (!g.lattice.empty()) {
        double cx = 0, cy = 0;
        for (const auto& p : g.lattice) cx += p[0], cy += p[1];
        cx /= g.lattice.size();
        cy /= g.lattice.size();
        double bd = std::numeric_limits<double>::infinity();
        for (int v : g.whites) {
            double dx = g.lattice[v][0] - cx, dy = g.lattice[v][1] - cy;
            double d = dx * dx + dy * dy - (g.kind[v] == VKind::S ? 1e-9 : 0.0);
            if (d < bd) bd = d, best = v;
        }
        return best;
    }
    auto adj = extension_adjacency(g);
    int bestecc = std::numeric_limits<int>::max();
    for (int v : g.whites) {
        std::vector<int> dist(g.num_vertices(), -1);
        std::deque<int> qu{v};
        dist[v] = 0;
        int ecc = 0;
        while (!qu.empty()) {
            int x = qu.front();
            qu.pop_front();
            ecc = std::max(ecc, dist[x]);
            for (int y : adj[x])
                if (dist[y] < 0) dist[y] = dist[x] + 1, qu.push_back(y);
        }
        if (ecc < bestecc) bestecc = ecc, best = v;
    }
    return best;
}

CmcPair integrate_one_forms(const KoebePair& kp, const CmcRadii& radii, double tol, int origin) {
    const auto& g = kp.graph();
    Flavor f = kp.flavor;
    int n = g.num_vertices();
    CmcPair P;
    P.flavor = f;
    P.q = kp.q;
    P.koebe = kp;
    P.radii = radii;
    for (int v : g.whites)
        if (g.kind[v] == VKind::C && !kp.has_face[v]) throw DegenerateFace("integrate_one_forms: face without centre");
    std::vector<Vec3> kext(n);
    for (int v = 0; v < n; ++v) kext[v] = kp.extension(v);

    // one-forms on (white v -> black b); both negated so that c* - c is the Gauss map k
    auto forms = [&](int v, int b) {
        double l = signed_length(radii, g, v, b);
        if (std::abs(l) < 1e-14) throw DegenerateFace("integrate_one_forms: zero Koebe edge");
        Vec3 u = (kext[b] - kext[v]) / l;
        double eps = g.edge_color(v, b) == EdgeColor::Horizontal ? 1.0 : -1.0;
        return std::pair<Vec3, Vec3>{-radii.d[v] * u, -eps * radii.dstar[v] * u};
    };
    auto oriented = [&](int a, int b) {
        // a -> b along an extension edge
        if (g.is_white(a)) return forms(a, b);
        auto [x, y] = forms(b, a);
        return std::pair<Vec3, Vec3>{-x, -y};
    };

    P.origin = origin >= 0 ? origin : central_white(g);
    P.c.assign(n, Vec3::Zero());
    P.cstar.assign(n, Vec3::Zero());
    std::vector<char> seen(n, 0);
    auto adj = extension_adjacency(g);
    P.c[P.origin] = Vec3::Zero();
    P.cstar[P.origin] = kext[P.origin];
    seen[P.origin] = 1;
    std::deque<int> qu{P.origin};
    while (!qu.empty()) {
        int a = qu.front();
        qu.pop_front();
        for (int b : adj[a]) {
            if (seen[b]) continue;
            auto [dc, dcs] = oriented(a, b);
            P.c[b] = P.c[a] + dc;
            P.cstar[b] = P.cstar[a] + dcs;
            seen[b] = 1;
            qu.push_back(b);
        }
    }
    for (int v = 0; v < n; ++v)
        if (!seen[v]) throw InvalidGraph("integrate_one_forms: disconnected extension");
    for (std::size_t qi = 0; qi < g.quads.size(); ++qi) {
        const auto& Q = g.quads[qi];
        Vec3 sc = Vec3::Zero(), ss = Vec3::Zero();
        for (int i = 0; i < 4; ++i) {
            auto [dc, dcs] = oriented(Q[i], Q[(i + 1) % 4]);
            sc += dc;
            ss += dcs;
        }
        double rc = sc.norm(), rs = ss.norm();
        if (std::max(rc, rs) > std::max(P.closure_c, P.closure_cstar)) P.worst_cycle = static_cast<int>(qi);
        P.closure_c = std::max(P.closure_c, rc);
        P.closure_cstar = std::max(P.closure_cstar, rs);
    }
    if (std::max(P.closure_c, P.closure_cstar) > tol)
        throw ClosureViolation("integrate_one_forms: closure residual " + std::to_string(std::max(P.closure_c, P.closure_cstar)) +
                               " on quad " + std::to_string(P.worst_cycle));
    P.n.resize(n);
    for (int v = 0; v < n; ++v) P.n[v] = P.cstar[v] - P.c[v];
    (void)f;
    return P;
}

DualSurface christoffel_dual(const SQuadGraph& g, const std::vector<Vec3>& c, const std::vector<double>& d,
                             double lambda, int origin, const Vec3& origin_value, double tol) {
    int n = g.num_vertices();
    DualSurface out;
    out.centers.assign(n, Vec3::Zero());
    out.radii.assign(n, 0.0);
    // G-edges: (s1, s2, black)
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    std::vector<std::array<int, 3>> edges;
    for (int b = 0; b < n; ++b) {
        if (g.is_white(b)) continue;
        auto ss = s_neighbors(g, b);
        if (ss.size() != 2) continue;
        edges.push_back({ss[0], ss[1], b});
        adj[ss[0]].push_back({ss[1], b});
        adj[ss[1]].push_back({ss[0], b});
    }
    auto form = [&](int a, int b, int blk) {
        double eps = g.edge_color(a, blk) == EdgeColor::Horizontal ? 1.0 : -1.0;
        return Vec3(eps * lambda * (c[b] - c[a]) / (d[a] * d[b]));
    };
    if (g.kind[origin] != VKind::S) throw InvalidGraph("christoffel_dual: origin must be an S vertex");
    std::vector<char> seen(n, 0);
    out.centers[origin] = origin_value;
    seen[origin] = 1;
    std::deque<int> qu{origin};
    while (!qu.empty()) {
        int a = qu.front();
        qu.pop_front();
        for (auto [b, blk] : adj[a]) {
            if (seen[b]) continue;
            out.centers[b] = out.centers[a] + form(a, b, blk);
            seen[b] = 1;
            qu.push_back(b);
        }
    }
    for (auto [a, b, blk] : edges)
        out.closure = std::max(out.closure, (out.centers[b] - out.centers[a] - form(a, b, blk)).norm());
    for (int v : g.whites)
        if (g.kind[v] == VKind::S) out.radii[v] = lambda / d[v];
    if (out.closure > tol) throw ClosureViolation("christoffel_dual: closure residual " + std::to_string(out.closure));
    return out;
}

double mixed_area(Flavor f, const std::vector<Vec3>& P, const std::vector<Vec3>& Q) {
    if (P.size() != Q.size() || P.size() < 3) throw NotParallel("mixed_area: polygons differ in size");
    if (planarity_residual(P) > 1e-8 || planarity_residual(Q) > 1e-8) throw NotPlanar("mixed_area: polygon not planar");
    std::size_t m = P.size();
    for (std::size_t i = 0; i < m; ++i) {
        Vec3 a = P[(i + 1) % m] - P[i], b = Q[(i + 1) % m] - Q[i];
        double na = a.norm(), nb = b.norm();
        if (na < 1e-14 || nb < 1e-14) continue;
        if (a.cross(b).norm() / (na * nb) > 1e-6) throw NotParallel("mixed_area: edges not parallel");
    }
    const std::vector<Vec3>& ref = P;
    Vec3 N = polygon_normal(f, ref);
    if (N.norm() < 1e-300) N = polygon_normal(f, Q);
    if (f == Flavor::Hyperbolic && minkowski(N, N) >= 0) throw DegenerateFace("mixed_area: face is not spacelike");
    Vec3 e1 = Vec3::Zero();
    for (std::size_t i = 0; i < m && norm(f, e1) < 1e-12; ++i) e1 = P[(i + 1) % m] - P[i];
    for (std::size_t i = 0; i < m && norm(f, e1) < 1e-12; ++i) e1 = Q[(i + 1) % m] - Q[i];
    e1 /= norm(f, e1);
    Vec3 e2 = cross(f, N, e1);
    e2 /= norm(f, e2);
    auto xy = [&](const Vec3& p) { return Eigen::Vector2d(dot(f, p, e1), dot(f, p, e2)); };
    auto det = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a[0] * b[1] - a[1] * b[0]; };
    double A = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        A += det(xy(P[i]), xy(Q[(i + 1) % m])) + det(xy(Q[i]), xy(P[(i + 1) % m]));
    return A / 4;
}

CurvatureReport curvatures(const CmcPair& pair) {
    const auto& g = pair.graph();
    Flavor f = pair.flavor;
    CurvatureReport out;
    out.closure = std::max(pair.closure_c, pair.closure_cstar);
    for (int v : g.whites) {
        if (g.kind[v] != VKind::C) continue;
        Ring ring = ring_around(g, v);
        if (!ring.closed) continue;
        std::vector<Vec3> P, N;
        for (int w : ring.whites) P.push_back(pair.c[w]), N.push_back(pair.n[w]);
        double A = mixed_area(f, P, P);
        double diam = 0.0;
        for (const auto& p : P)
            for (const auto& p2 : P) diam = std::max(diam, (p - p2).norm());
        if (std::abs(A) < 1e-14 * std::max(diam * diam, 1e-300)) throw DegenerateFace("curvatures: vanishing face area");
        double H = -mixed_area(f, P, N) / A;
        double K = mixed_area(f, N, N) / A;
        out.faces.push_back(v);
        out.H.push_back(H);
        out.K.push_back(K);
        out.mean_curvature_deviation = std::max(out.mean_curvature_deviation, std::abs(H - 1));
    }
    return out;
}

CmcChecks cmc_checks(const CmcPair& pair) {
    const auto& g = pair.graph();
    Flavor f = pair.flavor;
    const auto& rad = pair.radii;
    CmcChecks out;
    int n = g.num_vertices();
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    for (int v : g.whites) {
        out.lambda_spread = std::max(out.lambda_spread, std::abs(rad.d[v] * rad.dstar[v] - rad.lambda));
        Ring ring = ring_around(g, v);
        for (int b : ring.blacks) {
            if (g.kind[v] == VKind::S) {
                out.touching = std::max(out.touching, std::abs(norm(f, pair.c[b] - pair.c[v]) - std::abs(rad.d[v])));
                out.touching_dual = std::max(out.touching_dual, std::abs(norm(f, pair.cstar[b] - pair.cstar[v]) - std::abs(rad.dstar[v])));
            } else {
                out.face_circles = std::max({out.face_circles, std::abs(norm(f, pair.c[b] - pair.c[v]) - std::abs(rad.d[v])),
                                             std::abs(norm(f, pair.cstar[b] - pair.cstar[v]) - std::abs(rad.dstar[v]))});
            }
        }
        if (g.kind[v] == VKind::S) {
            double a = sqnorm(f, pair.n[v]) - rad.d[v] * rad.d[v] - rad.dstar[v] * rad.dstar[v];
            amin = std::min(amin, a);
            amax = std::max(amax, a);
        }
    }
    if (amax >= amin) {
        out.alpha_spread = amax - amin;
        out.alpha = 0.5 * (amax + amin);
    }
    double hmin = std::numeric_limits<double>::infinity(), hmax = -hmin, vmin = hmin, vmax = -hmin;
    for (int b = 0; b < n; ++b) {
        if (g.is_white(b)) continue;
        auto ss = s_neighbors(g, b);
        if (ss.size() == 2) {
            out.touching = std::max(out.touching, collinearity(pair.c[ss[0]], pair.c[b], pair.c[ss[1]]));
            out.touching_dual = std::max(out.touching_dual, collinearity(pair.cstar[ss[0]], pair.cstar[b], pair.cstar[ss[1]]));
        }
        double t2 = sqnorm(f, pair.cstar[b] - pair.c[b]);
        if (g.edge_color(ss[0], b) == EdgeColor::Horizontal)
            hmin = std::min(hmin, t2), hmax = std::max(hmax, t2);
        else
            vmin = std::min(vmin, t2), vmax = std::max(vmax, t2);
    }
    if (hmax >= hmin) out.edge_normal_spread = hmax - hmin, out.edge_normal_h = 0.5 * (hmax + hmin);
    if (vmax >= vmin) out.edge_normal_spread = std::max(out.edge_normal_spread, vmax - vmin), out.edge_normal_v = 0.5 * (vmax + vmin);
    for (int v = 0; v < n; ++v) out.gauss_map = std::max(out.gauss_map, (pair.n[v] - pair.koebe.extension(v)).norm());
    for (int v : g.whites) {
        if (g.kind[v] != VKind::C) continue;
        Ring ring = ring_around(g, v);
        if (!ring.closed) continue;
        const Vec3& m = pair.n[v];
        std::vector<Vec3> P;
        for (std::size_t i = 0; i < ring.whites.size(); ++i) {
            int a = ring.whites[i], b = ring.whites[(i + 1) % ring.whites.size()];
            out.face_normal = std::max({out.face_normal, metric_cos(f, m, pair.c[b] - pair.c[a]), metric_cos(f, m, pair.cstar[b] - pair.cstar[a])});
            P.push_back(pair.c[a]);
        }
        Vec3 N = polygon_normal(f, P);
        ++out.faces_checked;
        if (f == Flavor::Hyperbolic && minkowski(N, N) < 0) ++out.timelike_normals;
    }
    return out;
}

LimitReport minimal_limit(const std::vector<PatternSolution>& family, double tol) {
    if (family.size() < 2) throw NonConvergentFamily("minimal_limit: need at least two members");
    LimitReport out;
    std::vector<const PatternSolution*> sols;
    for (const auto& s : family) sols.push_back(&s);
    std::sort(sols.begin(), sols.end(), [](auto* a, auto* b) { return a->q < b->q; });
    for (const auto* s : sols) {
        const auto& g = *s->graph;
        double eps = 1 - s->q;
        if (eps <= 0) throw NonConvergentFamily("minimal_limit: q must be below 1");
        double ep = 0.0, ed = 0.0;
        for (int v : g.whites) {
            if (g.kind[v] != VKind::S) continue;
            double x = s->var(v);
            auto [d, ds] = cmc_radius(s->flavor, s->q, VKind::S, x);
            double lim = s->flavor == Flavor::Spherical ? std::sinh(x) : std::cosh(x);
            // relative: beta grows with K as q -> 1, so the limit radii are unbounded
            ep = std::max(ep, std::abs(d * lim - 1));
            ed = std::max(ed, std::abs(2 * ds / (eps * lim) - 1));
        }
        out.eps.push_back(eps);
        out.err_primal.push_back(ep);
        out.err_dual.push_back(ed);
    }
    std::size_t m = out.eps.size();
    auto richardson = [&](const std::vector<double>& e) {
        double e1 = e[m - 2], e2 = e[m - 1], x1 = out.eps[m - 2], x2 = out.eps[m - 1];
        return e2 - x2 * (e1 - e2) / (x1 - x2);
    };
    auto slope = [&](const std::vector<double>& e) {
        return std::log(e.front() / e.back()) / std::log(out.eps.front() / out.eps.back());
    };
    out.extrapolated_primal = richardson(out.err_primal);
    out.extrapolated_dual = richardson(out.err_dual);
    out.slope_primal = slope(out.err_primal);
    out.slope_dual = slope(out.err_dual);
    for (std::size_t i = 1; i < m; ++i)
        if (out.err_primal[i] > out.err_primal[i - 1] || out.err_dual[i] > out.err_dual[i - 1])
            throw NonConvergentFamily("minimal_limit: radii errors do not decrease with eps");
    if (std::abs(out.extrapolated_primal) > tol || std::abs(out.extrapolated_dual) > tol)
        throw NonConvergentFamily("minimal_limit: extrapolated error above tolerance");
    return out;
}

std::pair<std::vector<Vec3>, std::vector<Vec3>> limit_surfaces(const CmcPair& pair) {
    double eps = 1 - pair.q;
    if (eps <= 0) throw DomainError("limit_surfaces: q must be below 1");
    std::vector<Vec3> cs(pair.cstar.size());
    for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = pair.cstar[i] / eps;
    return {pair.c, cs};
}

}  // namespace cmc
