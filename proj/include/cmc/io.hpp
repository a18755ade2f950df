#pragma once
#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cmc/verify.hpp"

namespace cmc {

struct SearchSpec {
    // kite_symmetry | side_ratio | side_fraction | side_length | synthetic
    std::string criterion = "kite_symmetry";
    int corner = 1;       // kite_symmetry, side_ratio
    int side = 0;         // side_fraction, side_length: side k joins corners k and k+1
    double target = 0.0;
    double lo = 0.99, hi = 0.9999;
    double tol = 1e-6;
    int max_iter = 100;
};

struct OutputSpec {
    std::string dir = "out";
    bool svg = true;
    bool obj = true;
    bool report = true;
};

struct PipelineConfig {
    Flavor flavor = Flavor::Spherical;
    int I = 0, J = 0;            // rectangle
    int umbilic = 0;             // umbilic patch of this radius
    std::string graph_path;      // serialized S-quad graph
    double q = 0.0;
    bool q_search = false;
    BoundaryKind kind = BoundaryKind::NeumannAngles;
    // angles are stored as multiples of pi
    std::array<double, 4> corners{0.5, 0.5, 0.5, 0.5};  // rectangles only, ccw from the lattice origin
    bool has_corners = false;
    double side = 1.0;
    std::map<int, double> theta;      // per-vertex overrides
    double dirichlet = 0.0;           // default Dirichlet value for every boundary white
    std::map<int, double> fixed;
    std::map<int, int> orientation;
    SolverOptions solver;
    LayoutOptions layout;
    Tolerances tolerances;
    OutputSpec output;
    SearchSpec search;
    int replicate = 0;
    std::string echo;  // canonical JSON of the parsed config
};

// Rational multiple of pi: "2/3" -> 0.666..., "1" -> 1
double parse_pi_multiple(const std::string& text);

PipelineConfig parse_config(const std::string& text);
// relative graph paths are resolved against the config file's directory
PipelineConfig load_config(const std::string& path);
std::string config_to_json(const PipelineConfig& cfg);

std::shared_ptr<SQuadGraph> build_graph(const PipelineConfig& cfg);
BoundaryData build_boundary(const PipelineConfig& cfg, const SQuadGraph& g);

struct ObjGroup {
    std::string name;
    std::vector<Vec3> vertices;
    std::vector<std::vector<int>> faces;  // 0-based; faces with more than four vertices are fanned on output
};

std::string obj_text(const std::vector<ObjGroup>& groups, const std::string& echo = {});
// S-net (faces around C vertices) or C-net (faces around interior S vertices)
ObjGroup koebe_net_obj(const KoebePair& kp, VKind net);
// surface over G: values at S vertices, faces around C vertices
ObjGroup surface_obj(const SQuadGraph& g, const std::vector<Vec3>& values, const std::string& name);

// Inserts the config echo as an XML comment after the opening svg tag.
std::string annotate_svg(const std::string& svg, const std::string& echo);

std::string solution_json(const PatternSolution& sol, const EmbeddedRingPattern* pat, const std::string& echo = {});

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace cmc
