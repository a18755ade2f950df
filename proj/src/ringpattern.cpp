#include "cmc/ringpattern.hpp"
#include "cmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SparseCholesky>

namespace cmc {

namespace {

constexpr double kPi = std::numbers::pi;

double box_eps(double K) { return 1e-9 * K; }

}  // namespace

const char* flavor_name(Flavor f) { return f == Flavor::Spherical ? "spherical" : "hyperbolic"; }

BoundaryData rectangle_angles(const SQuadGraph& g, const std::array<double, 4>& corners, double side) {
    BoundaryData bd;
    for (int v : g.whites)
        if (g.boundary[v]) bd.theta[v] = side;
    auto cs = g.corners();
    if (cs.size() != 4) throw ConfigError("rectangle_angles: graph has no rectangle corners");
    for (int k = 0; k < 4; ++k) bd.theta[cs[k]] = corners[k];
    return bd;
}

std::vector<double> phi_assignment(const SQuadGraph& g, const BoundaryData& bd, Flavor flavor) {
    if (bd.kind != BoundaryKind::NeumannAngles) throw DomainError("phi_assignment: Neumann data required");
    std::vector<double> phi(g.whites.size(), 0.0);
    for (std::size_t i = 0; i < g.whites.size(); ++i) {
        int v = g.whites[i];
        if (!g.boundary[v]) {
            phi[i] = flavor == Flavor::Spherical ? 2 * kPi : -2 * kPi;
            continue;
        }
        auto it = bd.theta.find(v);
        if (it == bd.theta.end()) throw DomainError("phi_assignment: missing boundary angle for vertex " + std::to_string(v));
        double th = it->second;
        if (!std::isfinite(th) || th <= -2 * kPi || th >= 2 * kPi) throw DomainError("phi_assignment: angle outside (-2pi, 2pi)");
        int deg = static_cast<int>(g.star[v].size());
        bool corner = deg == 1;
        int s = bd.sign(v);
        if (flavor == Flavor::Spherical) {
            phi[i] = s > 0 ? kPi * deg - th : -th;
        } else {
            if (corner && std::abs(th) >= kPi) throw DomainError("phi_assignment: hyperbolic corner angle must satisfy |theta| < pi");
            phi[i] = s > 0 ? -th : (corner ? -th - kPi : -th - 2 * kPi);
        }
    }
    return phi;
}

PatternFunctional::PatternFunctional(const SQuadGraph& g, double q, Flavor flavor, std::vector<double> phi)
    : ker_(q), flavor_(flavor), n_(static_cast<int>(g.whites.size())) {
    for (auto [s, c] : g.white_edges) edges_.push_back({g.white_index[s], g.white_index[c]});
    phi_ = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()));
}

double PatternFunctional::value(const Eigen::VectorXd& x) const {
    double sgn = flavor_ == Flavor::Spherical ? -1.0 : 1.0;
    double s = 0.0;
    for (auto [a, b] : edges_) s += ker_.F(x[a] - x[b]) + sgn * ker_.F(x[a] + x[b]);
    return s + phi_.dot(x);
}

Eigen::VectorXd PatternFunctional::gradient(const Eigen::VectorXd& x) const {
    double sgn = flavor_ == Flavor::Spherical ? -1.0 : 1.0;
    Eigen::VectorXd gr = phi_;
    for (auto [a, b] : edges_) {
        double gm = ker_.g(x[a] - x[b]), gp = ker_.g(x[a] + x[b]);
        gr[a] += gm + sgn * gp;
        gr[b] += -gm + sgn * gp;
    }
    return gr;
}

Eigen::SparseMatrix<double> PatternFunctional::hessian(const Eigen::VectorXd& x) const {
    double sgn = flavor_ == Flavor::Spherical ? -1.0 : 1.0;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(edges_.size() * 4);
    for (auto [a, b] : edges_) {
        double hm = ker_.dg(x[a] - x[b]), hp = sgn * ker_.dg(x[a] + x[b]);
        t.emplace_back(a, a, hm + hp);
        t.emplace_back(b, b, hm + hp);
        t.emplace_back(a, b, -hm + hp);
        t.emplace_back(b, a, -hm + hp);
    }
    Eigen::SparseMatrix<double> H(n_, n_);
    H.setFromTriplets(t.begin(), t.end());
    return H;
}

double PatternFunctional::du(const Eigen::VectorXd& x) const {
    double sgn = flavor_ == Flavor::Spherical ? -1.0 : 1.0;
    double s = phi_.sum();
    for (auto [a, b] : edges_) s += 2 * sgn * ker_.g(x[a] + x[b]);
    return s;
}

double PatternFunctional::duu(const Eigen::VectorXd& x) const {
    double sgn = flavor_ == Flavor::Spherical ? -1.0 : 1.0;
    double s = 0.0;
    for (auto [a, b] : edges_) s += 4 * sgn * ker_.dg(x[a] + x[b]);
    return s;
}

std::pair<double, std::vector<double>> functional_value_grad(const PatternSolution& sol, const std::vector<double>& phi) {
    PatternFunctional S(*sol.graph, sol.q, sol.flavor, phi);
    Eigen::Map<const Eigen::VectorXd> x(sol.vars.data(), static_cast<Eigen::Index>(sol.vars.size()));
    Eigen::VectorXd gr = S.gradient(x);
    return {S.value(x), std::vector<double>(gr.data(), gr.data() + gr.size())};
}

Eigen::SparseMatrix<double> hessian(const PatternSolution& sol) {
    std::vector<double> phi(sol.vars.size(), 0.0);
    PatternFunctional S(*sol.graph, sol.q, sol.flavor, phi);
    Eigen::Map<const Eigen::VectorXd> x(sol.vars.data(), static_cast<Eigen::Index>(sol.vars.size()));
    return S.hessian(x);
}

double interior_residual(const PatternSolution& sol) {
    const auto& g = *sol.graph;
    Kernel ker(sol.q);
    double worst = 0.0;
    for (int v : g.whites) {
        if (g.boundary[v]) continue;
        double s = 0.0, b = sol.var(v);
        for (int w : white_neighbors(g, v)) {
            double bw = sol.var(w);
            s += sol.flavor == Flavor::Spherical ? ker.g(b + bw) - ker.g(b - bw) : ker.g(b - bw) + ker.g(b + bw);
        }
        worst = std::max(worst, std::abs(s - 2 * kPi));
    }
    return worst;
}

namespace {

// largest step in [0,1] keeping lo <= x + a d <= hi
double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& d, double lo, double hi) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (d[i] > 0 && x[i] + d[i] > hi) a = std::min(a, (hi - x[i]) / d[i]);
        if (d[i] < 0 && x[i] + d[i] < lo) a = std::min(a, (lo - x[i]) / d[i]);
    }
    return std::max(a, 0.0);
}

// Newton with backtracking for the convex hyperbolic functional; `free` masks the unknowns.
PatternSolution newton_convex(const PatternFunctional& S, Eigen::VectorXd x, const std::vector<char>& free,
                              const SolverOptions& opt) {
    double K = S.kernel().K();
    double lo = box_eps(K), hi = 2 * K - box_eps(K);
    int n = S.size();
    auto masked_grad = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd gr = S.gradient(y);
        for (int i = 0; i < n; ++i)
            if (!free[i]) gr[i] = 0.0;
        return gr;
    };
    Eigen::VectorXd gr = masked_grad(x);
    double f = S.value(x);
    int it = 0, pinned = 0;
    double res = gr.lpNorm<Eigen::Infinity>();
    for (; it < opt.max_iter && res > opt.tol; ++it) {
        Eigen::SparseMatrix<double> H = S.hessian(x);
        for (int k = 0; k < H.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator e(H, k); e; ++e)
                if (!free[e.row()] || !free[e.col()]) e.valueRef() = e.row() == e.col() ? 1.0 : 0.0;
        Eigen::VectorXd d;
        double mu = 0.0;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::SparseMatrix<double> A = H;
            if (mu > 0) {
                Eigen::SparseMatrix<double> I(n, n);
                I.setIdentity();
                A += mu * I;
            }
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
            if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) {
                d = ldlt.solve(-gr);
                break;
            }
            mu = mu == 0.0 ? 1e-10 : 10 * mu;
        }
        if (d.size() == 0) throw NonConvergence("hyperbolic Newton: Hessian factorization failed", res);
        double amax = max_step(x, d, lo, hi);
        if (amax < 1.0) {
            ++pinned;
            amax *= 0.99;
        }
        double a = amax, slope = gr.dot(d);
        bool accepted = false;
        for (int ls = 0; ls < 60 && a > 1e-16; ++ls, a *= 0.5) {
            Eigen::VectorXd xn = x + a * d;
            double fn = S.value(xn);
            Eigen::VectorXd gn = masked_grad(xn);
            if (fn <= f + 1e-4 * a * slope + 1e-13 * (1 + std::abs(f)) ||
                gn.lpNorm<Eigen::Infinity>() < 0.5 * res) {
                x = xn;
                f = fn;
                gr = gn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        res = gr.lpNorm<Eigen::Infinity>();
        if (pinned > 20) throw InfeasibleBoundary("hyperbolic solver: variables pinned at the box boundary");
    }
    if (res > opt.tol) throw NonConvergence("hyperbolic Newton did not reach tolerance", res);
    PatternSolution sol;
    sol.vars.assign(x.data(), x.data() + n);
    sol.residual = res;
    sol.iterations = it;
    return sol;
}

double inner_max(const PatternFunctional& S, const Eigen::VectorXd& x, double lo, double hi) {
    double tlo = lo - x.minCoeff(), thi = hi - x.maxCoeff();
    Eigen::VectorXd u = Eigen::VectorXd::Ones(x.size());
    auto h = [&](double t) { return S.du(x + t * u); };
    if (tlo > thi) throw SaddleEscape("reduced functional: variable spread exceeds the box");
    double hl = h(tlo), hh = h(thi);
    if (hl <= 0) return tlo;
    if (hh >= 0) return thi;
    double t = std::clamp(0.0, tlo, thi);
    for (int it = 0; it < 200; ++it) {
        double ht = h(t);
        if (ht > 0) tlo = t;
        else thi = t;
        if (std::abs(ht) < 1e-14 || thi - tlo < 1e-15 * (1 + std::abs(t))) break;
        double tn = t - ht / S.duu(x + t * u);
        t = (tn > tlo && tn < thi) ? tn : 0.5 * (tlo + thi);
    }
    return t;
}

}  // namespace

std::pair<double, double> reduced_value(const PatternFunctional& S, const Eigen::VectorXd& x) {
    double K = S.kernel().K();
    double t = inner_max(S, x, box_eps(K), 2 * K - box_eps(K));
    return {S.value(x + t * Eigen::VectorXd::Ones(x.size())), t};
}

namespace {

PatternSolution spherical_core(const PatternFunctional& S, Eigen::VectorXd x, const SolverOptions& opt) {
    int n = S.size();
    double K = S.kernel().K();
    double lo = box_eps(K), hi = 2 * K - box_eps(K);
    Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
    auto settle = [&](Eigen::VectorXd y) {
        double t = inner_max(S, y, lo, hi);
        return Eigen::VectorXd(y + t * u);
    };
    x = settle(x);
    double f = S.value(x);
    Eigen::VectorXd gr = S.gradient(x);
    double res = gr.lpNorm<Eigen::Infinity>();
    double mu = 0.0;
    int it = 0;
    for (; it < opt.max_iter && res > opt.tol; ++it) {
        Eigen::MatrixXd H = Eigen::MatrixXd(S.hessian(x));
        Eigen::VectorXd Hu = H * u;
        double uHu = u.dot(Hu);
        if (!(uHu < 0)) throw SaddleEscape("reduced functional: not concave along u");
        Eigen::MatrixXd Hs = H - Hu * Hu.transpose() / uHu;
        Eigen::VectorXd gp = gr - (gr.sum() / n) * u;
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - u * u.transpose() / n;
        Eigen::VectorXd d;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::MatrixXd A = Hs + mu * P + u * u.transpose() / n;
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            if (llt.info() == Eigen::Success) {
                d = llt.solve(-gp);
                break;
            }
            mu = mu == 0.0 ? 1e-8 : 10 * mu;
        }
        if (d.size() == 0) throw NonConvergence("spherical reduced Newton: factorization failed", res);
        double amax = max_step(x, d, lo, hi);
        if (amax < 1.0) amax *= 0.99;
        double a = amax, slope = gp.dot(d);
        bool accepted = false;
        for (int ls = 0; ls < 60 && a > 1e-16; ++ls, a *= 0.5) {
            Eigen::VectorXd xn = settle(x + a * d);
            double fn = S.value(xn);
            Eigen::VectorXd gn = S.gradient(xn);
            if (fn <= f + 1e-4 * a * slope + 1e-13 * (1 + std::abs(f)) ||
                gn.lpNorm<Eigen::Infinity>() < 0.5 * res) {
                x = xn;
                f = fn;
                gr = gn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            mu = mu == 0.0 ? 1e-6 : 10 * mu;
            if (mu > 1e8) break;
            continue;
        }
        mu = a == 1.0 ? mu * 0.1 : mu;
        if (mu < 1e-12) mu = 0.0;
        res = gr.lpNorm<Eigen::Infinity>();
    }
    if (res > opt.tol) throw NonConvergence("spherical reduced Newton did not reach tolerance", res);
    PatternSolution sol;
    sol.vars.assign(x.data(), x.data() + n);
    sol.residual = res;
    sol.iterations = it;
    return sol;
}

Eigen::VectorXd initial(int n, double K, const SolverOptions& opt, const std::vector<double>* init) {
    if (init && static_cast<int>(init->size()) == n)
        return Eigen::Map<const Eigen::VectorXd>(init->data(), n);
    return Eigen::VectorXd::Constant(n, opt.init_scale * K);
}

}  // namespace

PatternSolution solve_hyperbolic(std::shared_ptr<const SQuadGraph> g, double q, const BoundaryData& bd,
                                 const SolverOptions& opt, const std::vector<double>* init) {
    int n = static_cast<int>(g->whites.size());
    std::vector<double> phi;
    std::vector<char> free(n, 1);
    if (bd.kind == BoundaryKind::NeumannAngles) {
        phi = phi_assignment(*g, bd, Flavor::Hyperbolic);
    } else {
        phi.assign(n, -2 * kPi);
        for (auto [v, val] : bd.fixed) free[g->white_index.at(v)] = 0;
    }
    PatternFunctional S(*g, q, Flavor::Hyperbolic, phi);
    double K = S.kernel().K();
    Eigen::VectorXd x = initial(n, K, opt, init);
    if (bd.kind == BoundaryKind::DirichletRadii)
        for (auto [v, val] : bd.fixed) {
            if (!(val >= 0 && val <= 2 * K)) throw DomainError("Dirichlet value outside [0, 2K]");
            x[g->white_index.at(v)] = std::clamp(val, box_eps(K), 2 * K - box_eps(K));
        }
    PatternSolution sol = newton_convex(S, x, free, opt);
    sol.flavor = Flavor::Hyperbolic;
    sol.q = q;
    sol.graph = g;
    sol.boundary = bd;
    sol.phi = phi;
    return sol;
}

PatternSolution solve_spherical_reduced(std::shared_ptr<const SQuadGraph> g, double q, const BoundaryData& bd,
                                        const SolverOptions& opt, const std::vector<double>* init) {
    if (bd.kind != BoundaryKind::NeumannAngles) throw ConfigError("spherical patterns support Neumann angle data only");
    int n = static_cast<int>(g->whites.size());
    std::vector<double> phi = phi_assignment(*g, bd, Flavor::Spherical);
    PatternFunctional S(*g, q, Flavor::Spherical, phi);
    PatternSolution sol = spherical_core(S, initial(n, S.kernel().K(), opt, init), opt);
    sol.flavor = Flavor::Spherical;
    sol.q = q;
    sol.graph = g;
    sol.boundary = bd;
    sol.phi = phi;
    return sol;
}

PatternSolution solve(std::shared_ptr<const SQuadGraph> g, double q, Flavor flavor, const BoundaryData& bd,
                      const SolverOptions& opt) {
    BoundaryData cur = bd;
    PatternSolution sol;
    const std::vector<double>* init = nullptr;
    for (int round = 0; round < std::max(1, opt.orientation_rounds); ++round) {
        sol = flavor == Flavor::Spherical ? solve_spherical_reduced(g, q, cur, opt, init)
                                          : solve_hyperbolic(g, q, cur, opt, init);
        if (cur.kind != BoundaryKind::NeumannAngles || !opt.reclassify_orientation) return sol;
        // orientation re-classification from the sign of cn: var > K means r < 0
        double K = Modulus(q).K;
        bool changed = false;
        for (int v : g->whites) {
            if (!g->boundary[v] || bd.orientation.count(v)) continue;
            int s = sol.var(v) > K ? -1 : 1;
            if (s != cur.sign(v)) {
                cur.orientation[v] = s;
                changed = true;
            }
        }
        if (!changed) return sol;
        init = &sol.vars;
    }
    return sol;
}

}  // namespace cmc
