#include "cmc/layout.hpp"
#include "cmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCholesky>

namespace cmc {

namespace {

constexpr double kPi = std::numbers::pi;

double T(Flavor f, double x) { return f == Flavor::Spherical ? std::tan(x) : std::tanh(x); }
double S(Flavor f, double x) { return f == Flavor::Spherical ? std::sin(x) : std::sinh(x); }
double C(Flavor f, double x) { return f == Flavor::Spherical ? std::cos(x) : std::cosh(x); }
double unit(Flavor f) { return f == Flavor::Spherical ? 1.0 : -1.0; }
// <p,q> for points at distance x
double pair_dot(Flavor f, double x) { return f == Flavor::Spherical ? std::cos(x) : -std::cosh(x); }

double wrap(double a) {
    while (a > kPi) a -= 2 * kPi;
    while (a <= -kPi) a += 2 * kPi;
    return a;
}

struct Frame {
    Vec3 p, e1, e2;
};

Frame frame_at(Flavor f, const Vec3& p, const Vec3& toward) {
    Vec3 e1 = tangent_toward(f, p, toward);
    // e2 = p x e1 (metric-adjoint) keeps one orientation over S^2 and the upper sheet of H^2
    Vec3 e2 = cross(f, p, e1);
    e2 /= norm(f, e2);
    return {p, e1, e2};
}

Vec3 place(Flavor f, const Frame& fr, double theta, double dist) {
    Vec3 u = std::cos(theta) * fr.e1 + std::sin(theta) * fr.e2;
    return geodesic(f, fr.p, u, dist);
}

int pick_seed(const SQuadGraph& g) {
    int best = -1;
    if (g.rect_I >= 2) {
        double ca = g.rect_I - 1.0, cb = g.rect_J - 1.0, bd = 1e300;
        for (int v : g.whites) {
            double da = g.lattice[v][0] - ca, db = g.lattice[v][1] - cb, d = da * da + db * db;
            if (d < bd - 1e-12) {
                bd = d;
                best = v;
            }
        }
        return best;
    }
    std::size_t deg = 0;
    for (int v : g.whites)
        if (!g.boundary[v] && g.star[v].size() > deg) {
            deg = g.star[v].size();
            best = v;
        }
    return best >= 0 ? best : g.whites.front();
}

// Levenberg-Marquardt on distance, incidence and normalization residuals.
double polish(EmbeddedRingPattern& pat, int max_iter) {
    const auto& g = pat.graph();
    Flavor f = pat.flavor;
    int n = g.num_vertices();
    auto point = [&](int v) -> Vec3& { return g.is_white(v) ? pat.centers[v] : pat.touch[v]; };
    struct Res {
        int a, b;  // b < 0: normalization of a
        double target;
    };
    std::vector<Res> rs;
    for (int v = 0; v < n; ++v) rs.push_back({v, -1, unit(f)});
    for (int v : g.whites) {
        Ring ring = ring_around(g, v);
        for (int b : ring.blacks) {
            double rho = inner_at(g, v, b) ? pat.radii[v].r : pat.radii[v].R;
            rs.push_back({v, b, pair_dot(f, rho)});
        }
    }
    for (auto [s, c] : g.white_edges)
        rs.push_back({s, c, pair_dot(f, neighbor_distance(pat.radii[s], pat.radii[c], f))});
    auto residuals = [&](Eigen::VectorXd& r) {
        r.resize(static_cast<Eigen::Index>(rs.size()));
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const Vec3& a = point(rs[i].a);
            r[i] = (rs[i].b < 0 ? sqnorm(f, a) : dot(f, a, point(rs[i].b))) - rs[i].target;
        }
    };
    Eigen::VectorXd r;
    residuals(r);
    double mu = 1e-10;
    Vec3 J = f == Flavor::Spherical ? Vec3(1, 1, 1) : Vec3(1, 1, -1);
    for (int it = 0; it < max_iter && r.lpNorm<Eigen::Infinity>() > 1e-15; ++it) {
        std::vector<Eigen::Triplet<double>> t;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const Vec3& a = point(rs[i].a);
            if (rs[i].b < 0) {
                for (int k = 0; k < 3; ++k) t.emplace_back(static_cast<int>(i), 3 * rs[i].a + k, 2 * J[k] * a[k]);
            } else {
                const Vec3& b = point(rs[i].b);
                for (int k = 0; k < 3; ++k) {
                    t.emplace_back(static_cast<int>(i), 3 * rs[i].a + k, J[k] * b[k]);
                    t.emplace_back(static_cast<int>(i), 3 * rs[i].b + k, J[k] * a[k]);
                }
            }
        }
        Eigen::SparseMatrix<double> Jm(static_cast<Eigen::Index>(rs.size()), 3 * n);
        Jm.setFromTriplets(t.begin(), t.end());
        Eigen::SparseMatrix<double> A = Jm.transpose() * Jm;
        Eigen::VectorXd rhs = -(Jm.transpose() * r);
        double before = r.squaredNorm();
        bool improved = false;
        for (int tries = 0; tries < 20 && !improved; ++tries) {
            Eigen::SparseMatrix<double> Ad = A;
            for (int k = 0; k < 3 * n; ++k) Ad.coeffRef(k, k) += mu * (1.0 + A.coeff(k, k));
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Ad);
            if (ldlt.info() != Eigen::Success) {
                mu *= 10;
                continue;
            }
            Eigen::VectorXd d = ldlt.solve(rhs);
            std::vector<Vec3> saved_c = pat.centers, saved_t = pat.touch;
            for (int v = 0; v < n; ++v) point(v) += d.segment<3>(3 * v);
            Eigen::VectorXd rn;
            residuals(rn);
            if (rn.squaredNorm() < before) {
                r = rn;
                improved = true;
                mu = std::max(mu * 0.1, 1e-14);
            } else {
                pat.centers = saved_c;
                pat.touch = saved_t;
                mu *= 10;
            }
        }
        if (!improved) break;
    }
    for (int v = 0; v < n; ++v) point(v) = renormalize(f, point(v));
    return layout_residuals(pat).max();
}

}  // namespace

std::vector<RingRadii> radii_from_vars(const PatternSolution& sol, std::vector<int>* degenerate) {
    const auto& g = *sol.graph;
    Modulus m(sol.q);
    std::vector<RingRadii> out(g.num_vertices());
    double eps = 1e-8 * m.K;
    for (int v : g.whites) {
        double x = sol.var(v);
        if (degenerate && (x < eps || x > 2 * m.K - eps)) degenerate->push_back(v);
        JacobiTriple j = jacobi(x, m);
        if (sol.flavor == Flavor::Spherical) {
            out[v].r = std::atan2(j.cn, j.sn);
            out[v].R = std::atan2(j.dn, m.q * j.sn);
        } else {
            out[v].r = std::asinh(j.cn / j.sn);
            out[v].R = std::asinh(j.dn / (m.q * j.sn));
        }
    }
    return out;
}

double neighbor_distance(const RingRadii& a, const RingRadii& b, Flavor flavor) {
    double c1 = C(flavor, a.R) * C(flavor, b.r), c2 = C(flavor, a.r) * C(flavor, b.R);
    if (std::abs(c1 - c2) > 1e-9 * std::max(1.0, std::abs(c1)))
        throw LayoutInconsistency("neighbor_distance: rings violate the q-relation");
    double c = 0.5 * (c1 + c2);
    return flavor == Flavor::Spherical ? std::acos(std::clamp(c, -1.0, 1.0)) : std::acosh(std::max(c, 1.0));
}

double partial_kite_angle(const RingRadii& v, const RingRadii& w, bool inner, Flavor f) {
    return inner ? std::atan2(T(f, w.R), S(f, v.r)) : std::atan2(T(f, w.r), S(f, v.R));
}

EmbeddedRingPattern embed(const PatternSolution& sol, const LayoutOptions& opt) {
    const auto& g = *sol.graph;
    Flavor f = sol.flavor;
    EmbeddedRingPattern pat;
    pat.flavor = f;
    pat.q = sol.q;
    pat.solution = sol;
    pat.radii = radii_from_vars(sol, &pat.degenerate);
    int n = g.num_vertices();
    pat.centers.assign(n, Vec3::Zero());
    pat.touch.assign(n, Vec3::Zero());
    std::vector<char> placed(n, 0);
    std::vector<Frame> frames(n);
    std::vector<int> ref(n, -1);  // neighbour the frame's e1 points to

    int seed = opt.seed >= 0 ? opt.seed : pick_seed(g);
    pat.seed = seed;
    Frame f0{Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    frames[seed] = f0;
    pat.centers[seed] = f0.p;
    placed[seed] = 1;
    std::deque<int> queue{seed};
    double drift = 0.0;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        Ring ring = ring_around(g, v);
        int m = static_cast<int>(ring.whites.size());
        int k0 = 0;
        if (ref[v] >= 0)
            k0 = static_cast<int>(std::find(ring.whites.begin(), ring.whites.end(), ref[v]) - ring.whites.begin());
        const RingRadii& rv = pat.radii[v];
        auto part = [&](int k, int b) { return partial_kite_angle(rv, pat.radii[ring.whites[k]], inner_at(g, v, b), f); };
        int nb = static_cast<int>(ring.blacks.size());
        std::vector<double> tw(m, 0.0), tb(nb, 0.0);
        tw[k0] = 0.0;
        // quad k spans blacks[k], whites[k], blacks[(k+1) % nb]
        int steps = ring.closed ? m - 1 : m - 1 - k0;
        for (int s = 0, k = k0; s < steps; ++s, k = (k + 1) % m) {
            int b = ring.blacks[(k + 1) % nb];
            tb[(k + 1) % nb] = tw[k] + part(k, b);
            tw[(k + 1) % m] = tb[(k + 1) % nb] + part((k + 1) % m, b);
        }
        if (ring.closed) {
            int k = (k0 + m - 1) % m;
            tb[k0] = tw[k] + part(k, ring.blacks[k0]);
        } else {
            for (int k = k0; k > 0; --k) {
                tb[k] = tw[k] - part(k, ring.blacks[k]);
                tw[k - 1] = tb[k] - part(k - 1, ring.blacks[k]);
            }
            tb[0] = tw[0] - part(0, ring.blacks[0]);
            tb[nb - 1] = tw[m - 1] + part(m - 1, ring.blacks[nb - 1]);
        }
        // angles are measured from the reference neighbour, which sits at theta = 0 in frames[v]
        const Frame& fr = frames[v];
        for (int i = 0; i < nb; ++i) {
            int b = ring.blacks[i];
            double rho = inner_at(g, v, b) ? rv.r : rv.R;
            Vec3 x = place(f, fr, tb[i], rho);
            if (!placed[b]) {
                pat.touch[b] = x;
                placed[b] = 1;
            } else {
                drift = std::max(drift, surface_distance(f, x, pat.touch[b]));
            }
        }
        for (int k = 0; k < m; ++k) {
            int w = ring.whites[k];
            Vec3 x = place(f, fr, tw[k], neighbor_distance(rv, pat.radii[w], f));
            if (placed[w]) {
                drift = std::max(drift, surface_distance(f, x, pat.centers[w]));
                continue;
            }
            x = renormalize(f, x);
            pat.centers[w] = x;
            frames[w] = frame_at(f, x, pat.centers[v]);
            ref[w] = v;
            placed[w] = 1;
            queue.push_back(w);
        }
        if (ref[v] < 0 && m > 0) {
            // the seed's e1 must point at its reference neighbour
            ref[v] = ring.whites[k0];
        }
    }
    for (int v = 0; v < n; ++v)
        if (!placed[v]) throw LayoutInconsistency("embed: graph is not connected");
    pat.propagation_residual = std::max(drift, layout_residuals(pat).max());
    pat.residual = pat.propagation_residual;
    if (opt.polish && pat.residual > 1e-11) pat.residual = polish(pat, 50);
    if (pat.residual > opt.tol)
        throw LayoutInconsistency("embed: residual " + std::to_string(pat.residual) + " exceeds tolerance");
    return pat;
}

double LayoutResiduals::max() const {
    return std::max({normalization, q_relation, incidence, neighbor_distance, orthogonality});
}

LayoutResiduals layout_residuals(const EmbeddedRingPattern& pat) {
    const auto& g = pat.graph();
    Flavor f = pat.flavor;
    LayoutResiduals out;
    auto radial = [&](const Vec3& center, const Vec3& at) {
        // tangent at `at` pointing to `center`
        return tangent_toward(f, at, center);
    };
    for (int v = 0; v < g.num_vertices(); ++v) {
        const Vec3& x = g.is_white(v) ? pat.centers[v] : pat.touch[v];
        out.normalization = std::max(out.normalization, std::abs(sqnorm(f, x) - unit(f)));
        if (f == Flavor::Hyperbolic && x[2] <= 0) out.normalization = std::max(out.normalization, 1.0);
    }
    for (int v : g.whites) {
        const RingRadii& rr = pat.radii[v];
        double qr = f == Flavor::Spherical ? pat.q * std::cos(rr.r) - std::cos(rr.R)
                                           : pat.q * std::cosh(rr.R) - std::cosh(rr.r);
        out.q_relation = std::max(out.q_relation, std::abs(qr));
        Ring ring = ring_around(g, v);
        for (int b : ring.blacks) {
            double rho = inner_at(g, v, b) ? rr.r : rr.R;
            out.incidence = std::max(out.incidence, std::abs(surface_distance(f, pat.centers[v], pat.touch[b]) - std::abs(rho)));
        }
        if (ring.closed) {
            double sum = 0.0;
            for (std::size_t k = 0; k < ring.whites.size(); ++k) {
                int w = ring.whites[k];
                sum += partial_kite_angle(rr, pat.radii[w], inner_at(g, v, ring.blacks[k]), f) +
                       partial_kite_angle(rr, pat.radii[w], inner_at(g, v, ring.blacks[(k + 1) % ring.blacks.size()]), f);
            }
            out.angle_sum = std::max(out.angle_sum, std::abs(sum - 2 * kPi));
            // cyclic order of touching points around the centre
            Frame fr = frame_at(f, pat.centers[v], pat.touch[ring.blacks[0]]);
            double turn = 0.0, prev = 0.0;
            for (std::size_t k = 1; k <= ring.blacks.size(); ++k) {
                Vec3 u = tangent_toward(f, pat.centers[v], pat.touch[ring.blacks[k % ring.blacks.size()]]);
                double a = std::atan2(dot(f, u, fr.e2), dot(f, u, fr.e1));
                turn += wrap(a - prev);
                prev = a;
            }
            int expect = rr.r >= 0 ? 1 : -1;
            ++out.orientation_checked;
            if ((turn > 0 ? 1 : -1) != expect) ++out.orientation_mismatches;
        }
    }
    for (std::size_t qi = 0; qi < g.quads.size(); ++qi) {
        const auto& Q = g.quads[qi];
        int s = Q[0], c = Q[2];
        // uses one of the two q-relation forms so that broken radii are reported, not thrown
        double cd = C(f, pat.radii[s].R) * C(f, pat.radii[c].r);
        double d = f == Flavor::Spherical ? std::acos(std::clamp(cd, -1.0, 1.0)) : std::acosh(std::max(cd, 1.0));
        out.neighbor_distance = std::max(out.neighbor_distance, std::abs(surface_distance(f, pat.centers[s], pat.centers[c]) - d));
        for (int b : {Q[1], Q[3]}) {
            // a ring of radius zero is a point circle: orthogonality is vacuous and its direction is noise
            if (surface_distance(f, pat.centers[s], pat.touch[b]) < 1e-8 ||
                surface_distance(f, pat.centers[c], pat.touch[b]) < 1e-8)
                continue;
            Vec3 us = radial(pat.centers[s], pat.touch[b]), uc = radial(pat.centers[c], pat.touch[b]);
            double cosang = dot(f, us, uc);
            out.orthogonality = std::max(out.orthogonality, std::abs(std::asin(std::clamp(cosang, -1.0, 1.0))));
        }
    }
    return out;
}

std::string pattern_svg(const EmbeddedRingPattern& pat) {
    const auto& g = pat.graph();
    Flavor f = pat.flavor;
    auto proj = [&](const Vec3& x) -> std::pair<double, double> {
        // stereographic from the south pole / Poincare disk from (0,0,-1)
        double den = 1.0 + x[2];
        return {x[0] / den, x[1] / den};
    };
    double lim = 0.0;
    std::vector<std::vector<std::pair<double, double>>> curves;
    std::vector<int> kinds;
    for (int v : g.whites) {
        Frame fr = frame_at(f, pat.centers[v], pat.centers[white_neighbors(g, v).front()]);
        for (double rho : {pat.radii[v].r, pat.radii[v].R}) {
            std::vector<std::pair<double, double>> pts;
            for (int i = 0; i <= 96; ++i) {
                auto xy = proj(place(f, fr, 2 * kPi * i / 96, rho));
                lim = std::max({lim, std::abs(xy.first), std::abs(xy.second)});
                pts.push_back(xy);
            }
            curves.push_back(pts);
            kinds.push_back(g.kind[v] == VKind::S ? 0 : 1);
        }
    }
    lim = std::min(lim * 1.05, f == Flavor::Hyperbolic ? 1.05 : 50.0);
    std::ostringstream os;
    char buf[128];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << -lim << ' ' << -lim << ' ' << 2 * lim << ' ' << 2 * lim
       << "\" width=\"800\" height=\"800\">\n";
    os << "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"" << lim / 800 << "\">\n";
    if (f == Flavor::Hyperbolic) os << "<circle cx=\"0\" cy=\"0\" r=\"1\" stroke=\"#888\"/>\n";
    for (std::size_t i = 0; i < curves.size(); ++i) {
        os << "<polyline stroke=\"" << (kinds[i] == 0 ? "#c03030" : "#3050c0") << "\" points=\"";
        for (auto [x, y] : curves[i]) {
            std::snprintf(buf, sizeof buf, "%.6f,%.6f ", x, y);
            os << buf;
        }
        os << "\"/>\n";
    }
    for (int b = 0; b < g.num_vertices(); ++b) {
        if (g.is_white(b)) continue;
        auto [x, y] = proj(pat.touch[b]);
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.6f\" cy=\"%.6f\" r=\"%.6f\" fill=\"#000\"/>\n", x, y, lim / 300);
        os << buf;
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace cmc
