#pragma once
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cmc/elliptic.hpp"
#include "cmc/quadgraph.hpp"

namespace cmc {

enum class Flavor { Spherical, Hyperbolic };

const char* flavor_name(Flavor f);

enum class BoundaryKind { NeumannAngles, DirichletRadii };

struct BoundaryData {
    BoundaryKind kind = BoundaryKind::NeumannAngles;
    std::map<int, double> theta;     // boundary white id -> nominal angle
    std::map<int, double> fixed;     // boundary white id -> prescribed beta/gamma
    std::map<int, int> orientation;  // boundary white id -> +1 / -1 (default +1)

    int sign(int v) const {
        auto it = orientation.find(v);
        return it == orientation.end() ? 1 : it->second;
    }
};

// Rectangle Neumann data: corner angles ccw from the lattice origin, `side` on the other boundary vertices.
BoundaryData rectangle_angles(const SQuadGraph& g, const std::array<double, 4>& corners, double side);

struct SolverOptions {
    double tol = 1e-10;
    int max_iter = 200;
    double init_scale = 0.8;
    // re-derive boundary orientation from sign(cn) and re-solve; off by default
    bool reclassify_orientation = false;
    int orientation_rounds = 5;
};

struct PatternSolution {
    Flavor flavor = Flavor::Spherical;
    double q = 0.0;
    std::shared_ptr<const SQuadGraph> graph;
    BoundaryData boundary;
    std::vector<double> vars;  // indexed by white index
    std::vector<double> phi;
    double residual = 0.0;     // gradient infinity norm at return
    int iterations = 0;

    double var(int v) const { return vars[graph->white_index[v]]; }
};

std::vector<double> phi_assignment(const SQuadGraph& g, const BoundaryData& bd, Flavor flavor);

// S_sph / S_hyp on white-vertex variables.
class PatternFunctional {
public:
    PatternFunctional(const SQuadGraph& g, double q, Flavor flavor, std::vector<double> phi);

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::SparseMatrix<double> hessian(const Eigen::VectorXd& x) const;
    // derivative along u = (1,...,1) and its second derivative
    double du(const Eigen::VectorXd& x) const;
    double duu(const Eigen::VectorXd& x) const;

    const Kernel& kernel() const { return ker_; }
    int size() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

private:
    Kernel ker_;
    Flavor flavor_;
    int n_;
    std::vector<std::pair<int, int>> edges_;  // white indices
    Eigen::VectorXd phi_;
};

std::pair<double, std::vector<double>> functional_value_grad(const PatternSolution& sol, const std::vector<double>& phi);
Eigen::SparseMatrix<double> hessian(const PatternSolution& sol);

// max |sum of neighbour contributions - 2pi| over interior whites
double interior_residual(const PatternSolution& sol);

PatternSolution solve_hyperbolic(std::shared_ptr<const SQuadGraph> g, double q, const BoundaryData& bd,
                                 const SolverOptions& opt = {}, const std::vector<double>* init = nullptr);
PatternSolution solve_spherical_reduced(std::shared_ptr<const SQuadGraph> g, double q, const BoundaryData& bd,
                                        const SolverOptions& opt = {}, const std::vector<double>* init = nullptr);
PatternSolution solve(std::shared_ptr<const SQuadGraph> g, double q, Flavor flavor, const BoundaryData& bd,
                      const SolverOptions& opt = {});

// reduced spherical functional: max over t of S(x + t u); returns (value, t*)
std::pair<double, double> reduced_value(const PatternFunctional& S, const Eigen::VectorXd& x);

}  // namespace cmc
