#pragma once
#include <string>
#include <vector>

#include "cmc/geometry.hpp"
#include "cmc/ringpattern.hpp"

namespace cmc {

struct RingRadii {
    double r = 0.0;  // signed inner radius
    double R = 0.0;  // outer radius
};

struct EmbeddedRingPattern {
    Flavor flavor = Flavor::Spherical;
    double q = 0.0;
    PatternSolution solution;
    std::vector<Vec3> centers;       // by vertex id, whites
    std::vector<Vec3> touch;         // by vertex id, blacks
    std::vector<RingRadii> radii;    // by vertex id, whites
    std::vector<int> degenerate;     // whites with vars within eps of {0, 2K}
    double propagation_residual = 0.0;  // before polish
    double residual = 0.0;              // after polish
    int seed = -1;

    const SQuadGraph& graph() const { return *solution.graph; }
};

std::vector<RingRadii> radii_from_vars(const PatternSolution& sol, std::vector<int>* degenerate = nullptr);

double neighbor_distance(const RingRadii& a, const RingRadii& b, Flavor flavor);

// Angle at the centre of ring v between the direction to neighbour w and the touching
// point b of their common quad. `inner` selects v's inner circle at b.
double partial_kite_angle(const RingRadii& v, const RingRadii& w, bool inner, Flavor flavor);

// True when ring v meets black b with its inner circle (horizontal S-edge).
inline bool inner_at(const SQuadGraph& g, int v, int b) { return g.edge_color(v, b) == EdgeColor::Horizontal; }

struct LayoutOptions {
    double tol = 1e-7;
    bool polish = true;
    int seed = -1;  // white vertex id; -1 picks the most central one
};

EmbeddedRingPattern embed(const PatternSolution& sol, const LayoutOptions& opt = {});

struct LayoutResiduals {
    double normalization = 0.0;
    double q_relation = 0.0;
    double incidence = 0.0;
    double neighbor_distance = 0.0;
    double orthogonality = 0.0;    // radians
    double angle_sum = 0.0;        // interior kite-angle sums vs 2pi
    int orientation_mismatches = 0;
    int orientation_checked = 0;
    double max() const;
};

LayoutResiduals layout_residuals(const EmbeddedRingPattern& pat);

// Stereographic (S^2) or Poincare-disk (H^2) projection drawn as SVG.
std::string pattern_svg(const EmbeddedRingPattern& pat);

}  // namespace cmc
