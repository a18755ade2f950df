#pragma once
#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cmc {

enum class VKind { S, C, Black };
enum class EdgeColor { Horizontal, Vertical };

inline EdgeColor other(EdgeColor c) {
    return c == EdgeColor::Horizontal ? EdgeColor::Vertical : EdgeColor::Horizontal;
}

// Plain quad graph G with bicolored edges; faces listed counterclockwise.
struct QuadGraph {
    int num_vertices = 0;
    std::vector<std::vector<int>> faces;
    std::map<std::pair<int, int>, EdgeColor> color;  // key (min id, max id)
    std::vector<std::array<int, 2>> coords;          // optional integer positions

    EdgeColor edge_color(int a, int b) const;
};

// One incident quad seen from a vertex: quad index and the vertex's slot in it.
struct Corner {
    int quad;
    int slot;
};

// Bipartite quad complex. Each quad is stored as (s, b, c, b') counterclockwise.
struct SQuadGraph {
    std::vector<VKind> kind;
    std::vector<std::array<int, 4>> quads;
    std::map<std::pair<int, int>, EdgeColor> color;
    std::vector<std::array<int, 2>> lattice;  // S-lattice position, if any
    int rect_I = 0, rect_J = 0;               // set by build_rectangle

    // derived by finalize()
    std::vector<bool> boundary;
    std::vector<int> degree;
    std::vector<std::vector<Corner>> star;  // ccw ordered incident quads
    std::vector<int> whites;                // white ids in id order
    std::vector<int> white_index;           // id -> index into whites, -1 for blacks
    std::vector<std::pair<int, int>> white_edges;  // (s, c) per quad, in quad order

    void finalize();

    int num_vertices() const { return static_cast<int>(kind.size()); }
    bool is_white(int v) const { return kind[v] != VKind::Black; }
    EdgeColor edge_color(int a, int b) const;
    // corner index 0..3 for rectangle corners (ccw from lattice origin), -1 otherwise
    int rectangle_corner(int v) const;
    std::vector<int> corners() const;
};

QuadGraph grid_graph(int I, int J);
QuadGraph umbilic_graph(int n);

SQuadGraph central_extension(const QuadGraph& G);
SQuadGraph build_rectangle(int I, int J);
SQuadGraph build_umbilic(int n);
QuadGraph restrict_to_G(const SQuadGraph& g);

// White neighbours in ccw order; for boundary vertices the open chain from one boundary side.
std::vector<int> white_neighbors(const SQuadGraph& g, int v);
// Around v in ccw order: b0, w0, b1, w1, ..., (b_m for open chains).
struct Ring {
    std::vector<int> blacks;
    std::vector<int> whites;
    bool closed = false;
};
Ring ring_around(const SQuadGraph& g, int v);

std::vector<std::string> validate(const SQuadGraph& g);

std::string to_json(const SQuadGraph& g);
SQuadGraph graph_from_json(const std::string& text);

}  // namespace cmc
