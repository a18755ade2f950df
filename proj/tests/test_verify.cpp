#include <gtest/gtest.h>

#include <numbers>

#include "cmc/errors.hpp"
#include "cmc/verify.hpp"
#include "json.hpp"

using namespace cmc;

namespace {

constexpr double pi = std::numbers::pi;

struct Run {
    PatternSolution sol;
    EmbeddedRingPattern pat;
    KoebePair kp;
    CmcPair pair;
    Artifacts artifacts() const { return {&sol, &pat, &kp, &pair}; }
};

Run run(Flavor f, double q, int n, std::array<double, 4> corners) {
    Run r;
    auto g = std::make_shared<SQuadGraph>(build_rectangle(n, n));
    r.sol = solve(g, q, f, rectangle_angles(*g, corners, pi));
    r.pat = embed(r.sol);
    r.kp = lift(r.pat);
    r.pair = integrate_one_forms(r.kp, cmc_radii(r.sol));
    return r;
}

}  // namespace

TEST(Verify, ValidPipelinePasses) {
    for (const auto& r : {run(Flavor::Spherical, 0.995798, 6, {pi / 2, 2 * pi / 3, pi / 2, pi / 2}),
                          run(Flavor::Hyperbolic, 0.99, 6, {pi / 2, pi / 10, 2 * pi / 5, pi / 5})}) {
        auto rep = run_all(r.artifacts());
        for (const auto& c : rep.checks) EXPECT_TRUE(c.pass || c.skipped) << c.name << " " << c.worst << " " << c.note;
        EXPECT_TRUE(rep.passed());
        ASSERT_NE(rep.find("cmc.mean-curvature"), nullptr);
        EXPECT_TRUE(rep.find("cmc.mean-curvature")->pass);
        auto j = nlohmann::json::parse(rep.to_json());
        EXPECT_EQ(j["schema"], "cmcsurf.report/1");
        EXPECT_EQ(j["passed"], true);
    }
}

TEST(Verify, BrokenQRelationFailsAndTaintsLaterStages) {
    auto r = run(Flavor::Spherical, 0.995798, 5, {pi / 2, 2 * pi / 3, pi / 2, pi / 2});
    const auto& g = *r.sol.graph;
    r.pat.radii[g.whites[g.whites.size() / 2]].R += 1e-3;
    auto rep = run_all(r.artifacts());
    EXPECT_FALSE(rep.passed());
    const auto* qrel = rep.find("layout.q-relation");
    ASSERT_NE(qrel, nullptr);
    EXPECT_FALSE(qrel->pass);
    EXPECT_FALSE(qrel->tainted);
    EXPECT_TRUE(rep.find("pattern.stationarity")->pass);
    for (const auto& c : rep.checks)
        if (c.stage == "koebe" || c.stage == "cmc") EXPECT_TRUE(c.tainted) << c.name;
}

TEST(Verify, MissingArtifactsAreSkipped) {
    auto r = run(Flavor::Hyperbolic, 0.99, 4, {pi / 2, pi / 10, 2 * pi / 5, pi / 5});
    Artifacts a{&r.sol, &r.pat, nullptr, nullptr};
    auto rep = run_all(a);
    EXPECT_TRUE(rep.find("layout.incidence")->pass);
    EXPECT_TRUE(rep.find("koebe.tangency")->skipped);
    EXPECT_TRUE(rep.find("cmc.closure")->skipped);
}

TEST(Verify, NearCirclePatternRingChecksPass) {
    auto g = std::make_shared<SQuadGraph>(build_rectangle(3, 3));
    auto sol = solve(g, 1 - 1e-9, Flavor::Spherical, rectangle_angles(*g, {pi / 2, 2 * pi / 3, pi / 2, pi / 2}, pi));
    auto pat = embed(sol);
    auto rep = run_all({&sol, &pat, nullptr, nullptr});
    for (const auto& c : rep.checks)
        if (c.stage == "pattern" || c.stage == "layout") EXPECT_TRUE(c.pass) << c.name << " " << c.worst;
}

TEST(Verify, BruteForceMatchesSolverOnSingleInterior) {
    auto g = std::make_shared<SQuadGraph>(build_rectangle(2, 2));
    auto sph = solve(g, 0.95, Flavor::Spherical, rectangle_angles(*g, {pi / 3, pi / 2, pi / 3, pi / 2}, pi));
    int c = -1;
    for (int v : g->whites)
        if (!g->boundary[v]) c = v;
    EXPECT_NEAR(brute_force_interior(*g, 0.95, Flavor::Spherical, sph.vars), sph.var(c), 1e-9);

    double K = Modulus(0.9).K;
    BoundaryData bd;
    bd.kind = BoundaryKind::DirichletRadii;
    int i = 0;
    for (int v : g->whites)
        if (g->boundary[v]) bd.fixed[v] = K * (0.5 + 0.3 * i++);
    auto hyp = solve_hyperbolic(g, 0.9, bd);
    EXPECT_NEAR(brute_force_interior(*g, 0.9, Flavor::Hyperbolic, hyp.vars), hyp.var(c), 1e-9);
}

TEST(Verify, BruteForceUniformHalfPeriod) {
    auto g = build_rectangle(2, 2);
    double K = Modulus(0.9).K;
    std::vector<double> vars(g.whites.size(), K);
    EXPECT_NEAR(brute_force_interior(g, 0.9, Flavor::Spherical, vars), K, 1e-12);
    EXPECT_THROW(brute_force_interior(build_rectangle(3, 3), 0.9, Flavor::Spherical,
                                      std::vector<double>(build_rectangle(3, 3).whites.size(), K)),
                 DomainError);
}

TEST(Verify, ContentHash) {
    EXPECT_EQ(content_hash(""), "cbf29ce484222325");
    EXPECT_EQ(content_hash("a"), "af63dc4c8601ec8c");
    EXPECT_NE(content_hash("{\"q\":0.99}"), content_hash("{\"q\":0.98}"));
}
