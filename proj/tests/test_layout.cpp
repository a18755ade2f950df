#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "cmc/errors.hpp"
#include "cmc/layout.hpp"

using namespace cmc;

namespace {

constexpr double pi = std::numbers::pi;

PatternSolution uniform(double q, Flavor f, double x, int I = 3, int J = 3) {
    PatternSolution sol;
    sol.flavor = f;
    sol.q = q;
    sol.graph = std::make_shared<SQuadGraph>(build_rectangle(I, J));
    sol.vars.assign(sol.graph->whites.size(), x);
    return sol;
}

RingRadii spherical_ring(double q, double r) { return {r, std::acos(q * std::cos(r))}; }

}  // namespace

TEST(Layout, RadiiAtHalfPeriod) {
    double q = 0.9;
    auto sol = uniform(q, Flavor::Spherical, Modulus(q).K);
    for (int v : sol.graph->whites) {
        auto rr = radii_from_vars(sol)[v];
        EXPECT_NEAR(rr.r, 0, 1e-14);
        EXPECT_NEAR(std::sin(rr.R), std::sqrt(1 - q * q), 1e-14);
    }
}

TEST(Layout, RadiiSatisfyQRelation) {
    for (double q : {0.5, 0.9, 0.99}) {
        double K = Modulus(q).K;
        for (double x : {0.2 * K, 0.9 * K, 1.6 * K}) {
            auto s = radii_from_vars(uniform(q, Flavor::Spherical, x))[0];
            EXPECT_NEAR(std::cos(s.R), q * std::cos(s.r), 1e-14);
            auto h = radii_from_vars(uniform(q, Flavor::Hyperbolic, x))[0];
            EXPECT_NEAR(q * std::cosh(h.R), std::cosh(h.r), 1e-12 * std::cosh(h.r));
            EXPECT_GT(h.R, 0);
        }
    }
}

TEST(Layout, CirclePatternLimit) {
    for (double beta : {0.3, 1.0, 2.2}) {
        auto rr = radii_from_vars(uniform(1.0, Flavor::Spherical, beta))[0];
        EXPECT_NEAR(rr.r, rr.R, 1e-14);
        EXPECT_NEAR(std::tanh(beta), std::cos(rr.R), 1e-14);
    }
}

TEST(Layout, NeighbourDistance) {
    double q = 0.9;
    auto a = spherical_ring(q, 0.4);
    auto centred = spherical_ring(q, 0.0);
    EXPECT_NEAR(neighbor_distance(a, centred, Flavor::Spherical), a.R, 1e-14);
    auto k = spherical_ring(q, 0.0);
    EXPECT_NEAR(neighbor_distance(k, k, Flavor::Spherical), k.R, 1e-14);

    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1.2, 1.2), w(0.05, 2.0);
    for (int i = 0; i < 20; ++i) {
        auto s1 = spherical_ring(q, u(rng)), s2 = spherical_ring(q, u(rng));
        EXPECT_NEAR(neighbor_distance(s1, s2, Flavor::Spherical), neighbor_distance(s2, s1, Flavor::Spherical), 1e-12);
        double r1 = w(rng), r2 = w(rng);
        RingRadii h1{r1, std::acosh(std::cosh(r1) / q)}, h2{r2, std::acosh(std::cosh(r2) / q)};
        EXPECT_NEAR(neighbor_distance(h1, h2, Flavor::Hyperbolic), neighbor_distance(h2, h1, Flavor::Hyperbolic), 1e-12);
    }
    RingRadii broken{0.3, 0.9};
    EXPECT_THROW(neighbor_distance(broken, spherical_ring(q, 0.2), Flavor::Spherical), LayoutInconsistency);
}

TEST(Layout, SymmetricSingleInteriorInstance) {
    auto g = std::make_shared<SQuadGraph>(build_rectangle(2, 2));
    auto bd = rectangle_angles(*g, {pi / 3, pi / 3, pi / 3, pi / 3}, pi);
    auto pat = embed(solve(g, 0.95, Flavor::Spherical, bd));
    auto cs = g->corners();
    int c = -1;
    for (int v : g->whites)
        if (!g->boundary[v]) c = v;
    const Vec3& pc = pat.centers[c];
    // the edge colouring allows the half-turn about the interior centre and the two mirrors
    for (int k = 0; k < 4; ++k) {
        const Vec3& a = pat.centers[cs[k]];
        const Vec3& b = pat.centers[cs[(k + 2) % 4]];
        EXPECT_NEAR(pc.dot(a), pc.dot(pat.centers[cs[0]]), 1e-9);
        EXPECT_LE((a + b - 2 * pc.dot(a) * pc).norm(), 1e-9);
        EXPECT_NEAR((a - pat.centers[cs[(k + 1) % 4]]).norm(), (b - pat.centers[cs[(k + 3) % 4]]).norm(), 1e-9);
    }
}

TEST(Layout, EmbeddedPatternInvariants) {
    struct Case {
        Flavor f;
        double q;
        std::array<double, 4> corners;
    };
    for (const auto& c : {Case{Flavor::Spherical, 0.995798, {pi / 2, 2 * pi / 3, pi / 2, pi / 2}},
                          Case{Flavor::Hyperbolic, 0.99, {pi / 2, pi / 10, 2 * pi / 5, pi / 5}}}) {
        auto g = std::make_shared<SQuadGraph>(build_rectangle(6, 6));
        auto pat = embed(solve(g, c.q, c.f, rectangle_angles(*g, c.corners, pi)));
        auto res = layout_residuals(pat);
        EXPECT_LE(res.normalization, 1e-9);
        EXPECT_LE(res.q_relation, 1e-9);
        EXPECT_LE(res.incidence, 1e-6);
        EXPECT_LE(res.neighbor_distance, 1e-6);
        EXPECT_LE(res.orthogonality, 1e-6);
        EXPECT_LE(res.angle_sum, 1e-6);
        EXPECT_EQ(res.orientation_mismatches, 0);
        if (c.f == Flavor::Hyperbolic)
            for (int v : g->whites) EXPECT_GT(pat.centers[v][2], 0);
        auto svg = pattern_svg(pat);
        EXPECT_NE(svg.find("<svg"), std::string::npos);
        EXPECT_NE(svg.find("</svg>"), std::string::npos);
    }
}

TEST(Layout, BrokenQRelationIsReported) {
    auto g = std::make_shared<SQuadGraph>(build_rectangle(4, 4));
    auto pat = embed(solve(g, 0.99, Flavor::Hyperbolic, rectangle_angles(*g, {pi / 2, pi / 10, 2 * pi / 5, pi / 5}, pi)));
    pat.radii[g->whites[3]].R *= 1.01;
    EXPECT_GT(layout_residuals(pat).q_relation, 1e-6);
}
