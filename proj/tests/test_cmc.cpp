#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "cmc/cmc.hpp"
#include "cmc/errors.hpp"

using namespace cmc;

namespace {

constexpr double pi = std::numbers::pi;

CmcPair build(Flavor f, double q, int n, std::array<double, 4> corners) {
    auto g = std::make_shared<SQuadGraph>(build_rectangle(n, n));
    auto sol = solve(g, q, f, rectangle_angles(*g, corners, pi));
    return integrate_one_forms(lift(embed(sol)), cmc_radii(sol));
}

CmcPair schwarz(int n = 6) { return build(Flavor::Spherical, 0.995798, n, {pi / 2, 2 * pi / 3, pi / 2, pi / 2}); }
CmcPair lorentz(int n = 6) { return build(Flavor::Hyperbolic, 0.99, n, {pi / 2, pi / 10, 2 * pi / 5, pi / 5}); }

std::vector<Vec3> face_of(const CmcPair& p, const std::vector<Vec3>& values, int v) {
    std::vector<Vec3> out;
    for (int w : ring_around(p.graph(), v).whites) out.push_back(values[w]);
    return out;
}

std::vector<int> closed_c_faces(const SQuadGraph& g) {
    std::vector<int> out;
    for (int v : g.whites)
        if (g.kind[v] == VKind::C && ring_around(g, v).closed) out.push_back(v);
    return out;
}

int some_s(const SQuadGraph& g) {
    for (int v : g.whites)
        if (g.kind[v] == VKind::S) return v;
    return -1;
}

}  // namespace

TEST(Cmc, HalfPeriodGivesEqualRadii) {
    for (Flavor f : {Flavor::Spherical, Flavor::Hyperbolic})
        for (VKind k : {VKind::S, VKind::C})
            for (double q : {0.8, 0.99}) {
                auto [d, ds] = cmc_radius(f, q, k, Modulus(q).K);
                EXPECT_NEAR(d, ds, 1e-14);
            }
}

TEST(Cmc, LambdaIsConstant) {
    std::mt19937 rng(2);
    for (Flavor f : {Flavor::Spherical, Flavor::Hyperbolic})
        for (double q : {0.7, 0.995}) {
            double lambda = (1 - q * q) / (4 * q);
            EXPECT_NEAR(cmc_lambda(q), lambda, 1e-16);
            std::uniform_real_distribution<double> u(0.01, 2 * Modulus(q).K - 0.01);
            for (int i = 0; i < 50; ++i)
                for (VKind k : {VKind::S, VKind::C}) {
                    auto [d, ds] = cmc_radius(f, q, k, u(rng));
                    EXPECT_NEAR(d * ds, lambda, 1e-12 * std::max(1.0, std::abs(d)));
                }
        }
}

TEST(Cmc, RadiiFromJacobiValues) {
    double q = 0.95, x = 1.3, sq = std::sqrt(q);
    auto j = jacobi(x, Modulus(q));
    auto s = cmc_radius(Flavor::Spherical, q, VKind::S, x);
    EXPECT_NEAR(s.first + s.second, j.dn / (sq * j.sn), 1e-13);
    auto c = cmc_radius(Flavor::Spherical, q, VKind::C, x);
    EXPECT_NEAR(c.first + c.second, j.dn / sq, 1e-13);
}

TEST(Cmc, MixedAreaOracles) {
    std::vector<Vec3> sq = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    EXPECT_NEAR(mixed_area(Flavor::Spherical, sq, sq), 1, 1e-15);
    // A(P, P) is the area of P: a tilted planar pentagon
    Eigen::Matrix3d rot = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    std::vector<std::array<double, 2>> xy = {{0, 0}, {2, 0}, {3, 1}, {1, 2.5}, {-0.5, 1}};
    double shoelace = 0;
    std::vector<Vec3> P;
    for (std::size_t i = 0; i < xy.size(); ++i) {
        auto a = xy[i], b = xy[(i + 1) % xy.size()];
        shoelace += a[0] * b[1] - a[1] * b[0];
        P.push_back(rot * Vec3(a[0], a[1], 0) + Vec3(1, -2, 0.5));
    }
    EXPECT_NEAR(mixed_area(Flavor::Spherical, P, P), shoelace / 2, 1e-12);
    // homothetic polygons: A(P, tP) = t A(P)
    std::vector<Vec3> Q;
    for (const auto& p : P) Q.push_back(2.5 * p);
    EXPECT_NEAR(mixed_area(Flavor::Spherical, P, Q), 2.5 * shoelace / 2, 1e-11);
    std::vector<Vec3> bent = sq;
    bent[2][2] = 0.2;
    EXPECT_THROW(mixed_area(Flavor::Spherical, bent, bent), NotPlanar);
    std::vector<Vec3> skew = {{0, 0, 0}, {1, 0, 0}, {1, 2, 0}, {0, 1, 0}};
    EXPECT_THROW(mixed_area(Flavor::Spherical, sq, skew), NotParallel);
}

TEST(Cmc, ChristoffelDualFacesHaveZeroMixedArea) {
    for (const auto& p : {schwarz(), lorentz()}) {
        const auto& g = p.graph();
        int o = some_s(g);
        auto dual = christoffel_dual(g, p.c, p.radii.d, p.radii.lambda, o, p.cstar[o]);
        for (int v : closed_c_faces(g)) {
            auto P = face_of(p, p.c, v), Q = face_of(p, dual.centers, v);
            double scale = std::sqrt(std::abs(mixed_area(p.flavor, P, P) * mixed_area(p.flavor, Q, Q)));
            EXPECT_LE(std::abs(mixed_area(p.flavor, P, Q)), 1e-8 * std::max(scale, 1.0));
        }
        for (int v : g.whites)
            if (g.kind[v] == VKind::S) EXPECT_LE((dual.centers[v] - p.cstar[v]).norm(), 1e-9);
    }
}

TEST(Cmc, DualOfDualIsOriginal) {
    auto p = schwarz(5);
    const auto& g = p.graph();
    int o = some_s(g);
    auto dual = christoffel_dual(g, p.c, p.radii.d, p.radii.lambda, o, Vec3(1, 2, 3));
    auto back = christoffel_dual(g, dual.centers, dual.radii, p.radii.lambda, o, p.c[o]);
    for (int v : g.whites)
        if (g.kind[v] == VKind::S) {
            EXPECT_LE((back.centers[v] - p.c[v]).norm(), 1e-10);
            EXPECT_NEAR(back.radii[v], p.radii.d[v], 1e-10 * std::abs(p.radii.d[v]));
        }
}

TEST(Cmc, IntegratedPairInvariants) {
    for (const auto& p : {schwarz(), lorentz()}) {
        EXPECT_LE(p.closure_c, 1e-7);
        EXPECT_LE(p.closure_cstar, 1e-7);
        EXPECT_LE(p.c[p.origin].norm(), 1e-15);
        const auto& kp = p.koebe;
        for (int v : p.graph().whites) EXPECT_LE((p.n[v] - (p.cstar[v] - p.c[v])).norm(), 1e-12);
        for (int v : p.graph().whites)
            if (p.graph().kind[v] == VKind::S) EXPECT_LE((p.n[v] - kp.extension(v)).norm(), 1e-9);
        auto curv = curvatures(p);
        EXPECT_LE(curv.mean_curvature_deviation, 1e-6);
        auto chk = cmc_checks(p);
        EXPECT_LE(chk.lambda_spread, 1e-8);
        EXPECT_LE(chk.alpha_spread, 1e-7);
        EXPECT_LE(chk.edge_normal_spread, 1e-7);
        double q = p.q;
        if (p.flavor == Flavor::Spherical) {
            EXPECT_NEAR(chk.alpha, (1 + q * q) / (2 * q), 1e-7);
            EXPECT_NEAR(chk.edge_normal_h, 1 / q, 1e-7);
            EXPECT_NEAR(chk.edge_normal_v, q, 1e-7);
        } else {
            EXPECT_NEAR(chk.alpha, -(1 + q * q) / (2 * q), 1e-7);
            EXPECT_NEAR(chk.edge_normal_h, -q, 1e-7);
            EXPECT_NEAR(chk.edge_normal_v, -1 / q, 1e-7);
            EXPECT_LT(chk.edge_normal_v, chk.edge_normal_h);
            EXPECT_EQ(chk.timelike_normals, chk.faces_checked);
        }
    }
}

TEST(Cmc, ScaledSurfaceHasReciprocalCurvature) {
    auto p = schwarz(5);
    for (double mu : {0.5, 2.0, 3.0}) {
        CmcPair s = p;
        for (std::size_t v = 0; v < s.c.size(); ++v) {
            s.c[v] = mu * p.c[v];
            s.cstar[v] = s.c[v] + s.n[v];
        }
        for (double H : curvatures(s).H) EXPECT_NEAR(H, 1 / mu, 1e-9);
    }
}

TEST(Cmc, ParallelPerturbationOfNormalsShiftsH) {
    auto p = schwarz(5);
    CmcPair s = p;
    for (std::size_t v = 0; v < s.n.size(); ++v) s.n[v] = p.n[v] + 0.01 * p.c[v];
    auto curv = curvatures(s);
    EXPECT_NEAR(curv.mean_curvature_deviation, 0.01, 1e-9);
    EXPECT_GT(curv.mean_curvature_deviation, 1e-6);
}

TEST(Cmc, MinimalLimitOfRadii) {
    auto g = std::make_shared<SQuadGraph>(build_rectangle(4, 4));
    auto bd = rectangle_angles(*g, {pi / 2, 2 * pi / 3, pi / 2, pi / 2}, pi);
    std::vector<PatternSolution> family;
    for (double eps : {1e-2, 1e-3, 1e-4}) family.push_back(solve(g, 1 - eps, Flavor::Spherical, bd));
    auto rep = minimal_limit(family);
    EXPECT_LE(rep.extrapolated_primal, 1e-4);
    EXPECT_LE(rep.extrapolated_dual, 1e-4);
    EXPECT_NEAR(rep.slope_primal, 1, 0.2);
    EXPECT_NEAR(rep.slope_dual, 1, 0.2);
    for (std::size_t i = 1; i < rep.eps.size(); ++i) EXPECT_LT(rep.err_primal[i], rep.err_primal[i - 1]);
}

TEST(Cmc, MaximalLimitOfRadii) {
    auto g = std::make_shared<SQuadGraph>(build_rectangle(4, 4));
    auto bd = rectangle_angles(*g, {pi / 2, pi / 10, 2 * pi / 5, pi / 5}, pi);
    std::vector<PatternSolution> family;
    for (double eps : {1e-2, 1e-3, 1e-4}) family.push_back(solve(g, 1 - eps, Flavor::Hyperbolic, bd));
    auto rep = minimal_limit(family);
    EXPECT_LE(rep.extrapolated_primal, 1e-4);
    EXPECT_LE(rep.extrapolated_dual, 1e-4);
}
