#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "cmc/pipeline.hpp"

using namespace cmc;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::shared_ptr<SQuadGraph> rect(int n) { return std::make_shared<SQuadGraph>(build_rectangle(n, n)); }

const std::array<double, 4> schwarz_corners{pi / 2, 2 * pi / 3, pi / 2, pi / 2};
const std::array<double, 4> lorentz_corners{pi / 2, pi / 10, 2 * pi / 5, pi / 5};

void elliptic_suite(Outcome& o) {
    double pyth = 0, degen = 0, fd = 0;
    for (double q : {0.3, 0.9, 0.995798, 1 - 1e-6}) {
        Modulus m(q);
        for (double x = -6; x <= 6; x += 0.173) {
            auto j = jacobi(x, m);
            pyth = std::max({pyth, std::abs(j.sn * j.sn + j.cn * j.cn - 1),
                             std::abs(j.dn * j.dn + q * q * j.sn * j.sn - 1)});
        }
    }
    Modulus near(1 - 1e-6);
    for (double x = 0; x <= 4; x += 0.25) {
        auto j = jacobi(x, near);
        degen = std::max({degen, std::abs(j.sn - std::tanh(x)), std::abs(j.cn - 1 / std::cosh(x)),
                          std::abs(j.dn - 1 / std::cosh(x))});
    }
    for (double q : {0.5, 0.99}) {
        Kernel ker(q);
        const double h = 1e-4;
        for (double x = 0.1; x < 2 * ker.K(); x += 0.29)
            fd = std::max(fd, std::abs((ker.F(x + h) - ker.F(x - h)) / (2 * h) - ker.g(x)));
    }
    o.detail << "pythagorean " << pyth << ", q->1 " << degen << ", F'-g " << fd;
    o.require(pyth <= 1e-12, "pythagorean");
    o.require(degen <= 1e-4, "degeneration");
    o.require(fd <= 1e-6, "F' = g");
}

void gradient_suite(Outcome& o) {
    std::mt19937 rng(2024);
    double grad = 0, min_eig = 1e300, max_u = -1e300;
    auto point = [&](int m, double K) {
        std::uniform_real_distribution<double> u(0.1 * K, 1.9 * K);
        Eigen::VectorXd x(m);
        for (int i = 0; i < m; ++i) x[i] = u(rng);
        return x;
    };
    std::uniform_real_distribution<double> angle(-7, 7);
    for (int n : {3, 4})
        for (Flavor f : {Flavor::Spherical, Flavor::Hyperbolic})
            for (double q : {0.9, 0.99}) {
                auto g = rect(n);
                int m = static_cast<int>(g->whites.size());
                std::vector<double> phi(m);
                for (auto& p : phi) p = angle(rng);
                PatternFunctional S(*g, q, f, phi);
                Eigen::VectorXd x = point(m, S.kernel().K());
                Eigen::VectorXd gr = S.gradient(x);
                const double h = 1e-5;
                for (int i = 0; i < m; ++i) {
                    Eigen::VectorXd a = x, b = x;
                    a[i] += h;
                    b[i] -= h;
                    grad = std::max(grad, std::abs(gr[i] - (S.value(a) - S.value(b)) / (2 * h)));
                }
            }
    auto g = rect(4);
    int m = static_cast<int>(g->whites.size());
    PatternFunctional hyp(*g, 0.99, Flavor::Hyperbolic, std::vector<double>(m, 0.0));
    PatternFunctional sph(*g, 0.99, Flavor::Spherical, std::vector<double>(m, 0.0));
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd H(hyp.hessian(point(m, hyp.kernel().K())));
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().minCoeff());
        Eigen::VectorXd u = Eigen::VectorXd::Ones(m);
        max_u = std::max(max_u, u.dot(sph.hessian(point(m, sph.kernel().K())) * u));
    }
    o.detail << "gradient vs central differences " << grad << ", hyperbolic lambda_min " << min_eig
             << ", spherical u'Hu max " << max_u;
    o.require(grad <= 1e-5, "gradient");
    o.require(min_eig >= -1e-9, "convexity");
    o.require(max_u < 0, "negative along u");
}

void solver_suite(Outcome& o) {
    auto g = rect(8);
    auto bd = rectangle_angles(*g, lorentz_corners, pi);
    auto ref = solve(g, 0.99, Flavor::Hyperbolic, bd);
    double K = Kernel(0.99).K();
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.2 * K, 1.8 * K);
    double spread = 0;
    for (int trial = 0; trial < 4; ++trial) {
        std::vector<double> start(ref.vars.size());
        for (auto& x : start) x = u(rng);
        SolverOptions opt;
        opt.tol = 1e-12;
        auto sol = solve_hyperbolic(g, 0.99, bd, opt, &start);
        for (std::size_t i = 0; i < sol.vars.size(); ++i) spread = std::max(spread, std::abs(sol.vars[i] - ref.vars[i]));
    }
    double brute = 0;
    auto one = rect(2);
    int c = -1;
    for (int v : one->whites)
        if (!one->boundary[v]) c = v;
    for (double q : {0.9, 0.99}) {
        auto sph = solve(one, q, Flavor::Spherical, rectangle_angles(*one, {pi / 3, pi / 2, pi / 3, pi / 2}, pi));
        brute = std::max(brute, std::abs(brute_force_interior(*one, q, Flavor::Spherical, sph.vars) - sph.var(c)));
        auto hyp = solve(one, q, Flavor::Hyperbolic, rectangle_angles(*one, lorentz_corners, pi));
        brute = std::max(brute, std::abs(brute_force_interior(*one, q, Flavor::Hyperbolic, hyp.vars) - hyp.var(c)));
    }
    o.detail << "8x8 gradient " << ref.residual << " in " << ref.iterations << " iterations, multi-start spread "
             << spread << ", bisection oracle " << brute;
    o.require(ref.residual <= 1e-10, "convergence");
    o.require(spread <= 1e-8, "uniqueness");
    o.require(brute <= 1e-9, "single interior vertex");
}

void layout_suite(Outcome& o) {
    double layout = 0, koebe = 0, lengths = 0;
    for (auto [f, q, corners] : {std::tuple{Flavor::Spherical, 0.995798, schwarz_corners},
                                 std::tuple{Flavor::Hyperbolic, 0.99, lorentz_corners}}) {
        auto g = rect(6);
        auto pat = embed(solve(g, q, f, rectangle_angles(*g, corners, pi)));
        auto lr = layout_residuals(pat);
        layout = std::max({layout, lr.incidence, lr.orthogonality, lr.neighbor_distance, lr.normalization});
        auto kr = verify_koebe(lift(pat));
        koebe = std::max({koebe, kr.tangency, kr.planarity, kr.dual_orthogonality});
        lengths = std::max({lengths, kr.edge_length_formulas, kr.edge_length_geometry});
    }
    o.detail << "layout " << layout << ", koebe " << koebe << ", edge lengths " << lengths;
    o.require(layout <= 1e-6, "layout");
    o.require(koebe <= 1e-7, "koebe");
    o.require(lengths <= 1e-8, "edge lengths");
}

void cmc_suite(Outcome& o) {
    auto g = rect(8);
    auto sol = solve(g, 0.995798, Flavor::Spherical, rectangle_angles(*g, schwarz_corners, pi));
    auto pair = integrate_one_forms(lift(embed(sol)), cmc_radii(sol));
    auto curv = curvatures(pair);
    auto chk = cmc_checks(pair);
    double closure = std::max({pair.closure_c, pair.closure_cstar, curv.closure});
    o.detail << curv.faces.size() << " faces, closure " << closure << ", max|H-1| " << curv.mean_curvature_deviation
             << ", lambda spread " << chk.lambda_spread << ", alpha spread " << chk.alpha_spread
             << ", edge normals " << chk.edge_normal_spread;
    o.require(closure <= 1e-7, "closure");
    o.require(curv.mean_curvature_deviation <= 1e-6, "H = 1");
    o.require(chk.lambda_spread <= 1e-8, "lambda");
    o.require(chk.alpha_spread <= 1e-7, "alpha");
    o.require(chk.edge_normal_spread <= 1e-7, "edge normals");
}

void limit_suite(Outcome& o) {
    for (auto [f, corners] : {std::pair{Flavor::Spherical, schwarz_corners}, std::pair{Flavor::Hyperbolic, lorentz_corners}}) {
        auto g = rect(6);
        auto bd = rectangle_angles(*g, corners, pi);
        std::vector<PatternSolution> family;
        for (double eps : {1e-2, 1e-3, 1e-4}) family.push_back(solve(g, 1 - eps, f, bd));
        auto rep = minimal_limit(family);
        bool decreasing = true;
        for (std::size_t i = 1; i < rep.eps.size(); ++i)
            decreasing = decreasing && rep.err_primal[i] < rep.err_primal[i - 1] && rep.err_dual[i] < rep.err_dual[i - 1];
        o.detail << flavor_name(f) << ": extrapolated " << std::max(rep.extrapolated_primal, rep.extrapolated_dual)
                 << ", slopes " << rep.slope_primal << "/" << rep.slope_dual << "; ";
        o.require(std::max(rep.extrapolated_primal, rep.extrapolated_dual) <= 1e-4, "extrapolation");
        o.require(decreasing, "monotone");
        o.require(std::abs(rep.slope_primal - 1) <= 0.2 && std::abs(rep.slope_dual - 1) <= 0.2, "linear in eps");
    }
}

void lorentz_suite(Outcome& o) {
    auto g = rect(8);
    auto sol = solve(g, 0.99, Flavor::Hyperbolic, rectangle_angles(*g, lorentz_corners, pi));
    auto pair = integrate_one_forms(lift(embed(sol)), cmc_radii(sol));
    auto curv = curvatures(pair);
    auto chk = cmc_checks(pair);
    o.detail << chk.timelike_normals << "/" << chk.faces_checked << " timelike face normals, max|H-1| "
             << curv.mean_curvature_deviation << ", squared edge normals " << chk.edge_normal_v << " < "
             << chk.edge_normal_h << " < 0";
    o.require(chk.faces_checked > 0 && chk.timelike_normals == chk.faces_checked, "spacelike");
    o.require(curv.mean_curvature_deviation <= 1e-6, "H = 1");
    o.require(chk.edge_normal_v < chk.edge_normal_h && chk.edge_normal_h < 0, "edge normal order");
}

void search_suite(Outcome& o) {
    struct Case {
        const char* name;
        double reference;
        std::string json;
    };
    auto config = [](const char* grid, const char* corners, const char* search) {
        return std::string(R"({"schema": "cmcsurf.config/1", "flavor": "spherical", "graph": {"rectangle": )") + grid +
               R"(}, "q": "search", "boundary": {"type": "neumann", "corners": )" + corners + R"(}, "search": )" +
               search + "}";
    };
    const char* kite = R"({"criterion": "kite_symmetry", "corner": 1, "bracket": [0.99, 0.9999], "tol": 1e-8})";
    const char* side = R"({"criterion": "side_length", "side": 0, "target": 0, "bracket": [0.97, 0.999], "tol": 1e-8})";
    const Case cases[] = {
        {"U(2,2)", 0.982889, config("[6, 6]", R"(["1/2", "2/3", "1/2", "1/2"])", side)},
        {"U(3,3)", 0.991636, config("[6, 6]", R"(["1/2", "1/4", "1/2", "1/2"])", side)},
        {"Schwarz P", 0.995798, config("[6, 4]", R"(["1/2", "2/3", "1/2", "1/2"])", kite)},
        {"I-WP", 0.994351, config("[6, 4]", R"(["1/2", "2/3", "3/4", "1/2"])", kite)},
    };
    bool soft = true;
    for (const auto& c : cases) {
        auto cfg = parse_config(c.json);
        auto r = search_q(cfg);
        bool inside = r.q > cfg.search.lo && r.q < cfg.search.hi;
        o.detail << c.name << " q " << r.q << " (|dq| " << std::abs(r.q - c.reference) << ") ";
        o.require(inside && std::abs(r.residual) <= 1e-6, std::string(c.name) + " bracket convergence");
        soft = soft && std::abs(r.q - c.reference) <= 0.01;
    }
    o.detail << (soft ? "; all within 0.01 of the reference values" : "; soft check: some q outside 0.01");
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget;  // seconds
        std::function<void(Outcome&)> run;
    };
    const Criterion criteria[] = {
        {"elliptic kernel", 1, elliptic_suite},     {"gradients and Hessians", 5, gradient_suite},
        {"boundary value solvers", 30, solver_suite}, {"layout and Koebe lift", 30, layout_suite},
        {"cmc construction", 60, cmc_suite},          {"minimal and maximal limits", 120, limit_suite},
        {"Lorentz end to end", 60, lorentz_suite},    {"q search", 600, search_suite},
    };
    int failed = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget) o.require(false, "runtime budget");
        std::printf("%s %d %s (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", index, c.name, secs, o.detail.str().c_str());
        failed += !o.pass;
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
