#include "cmc/quadgraph.hpp"
#include "cmc/errors.hpp"

#include <algorithm>
#include <climits>
#include <set>

#include "json.hpp"

namespace cmc {

namespace {

std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

const char* kind_name(VKind k) {
    switch (k) {
        case VKind::S: return "S";
        case VKind::C: return "C";
        default: return "B";
    }
}

}  // namespace

EdgeColor QuadGraph::edge_color(int a, int b) const {
    auto it = color.find(key(a, b));
    if (it == color.end()) throw InvalidGraph("uncolored edge");
    return it->second;
}

EdgeColor SQuadGraph::edge_color(int a, int b) const {
    auto it = color.find(key(a, b));
    if (it == color.end()) throw InvalidGraph("uncolored edge");
    return it->second;
}

void SQuadGraph::finalize() {
    int n = num_vertices();
    if (lattice.size() != static_cast<std::size_t>(n)) lattice.assign(n, {INT_MIN, INT_MIN});
    std::map<std::pair<int, int>, int> edge_use;
    std::vector<std::vector<Corner>> inc(n);
    for (int q = 0; q < static_cast<int>(quads.size()); ++q)
        for (int i = 0; i < 4; ++i) {
            const auto& Q = quads[q];
            if (Q[i] < 0 || Q[i] >= n) throw InvalidGraph("quad references unknown vertex");
            inc[Q[i]].push_back({q, i});
            ++edge_use[key(Q[i], Q[(i + 1) % 4])];
        }
    boundary.assign(n, false);
    degree.assign(n, 0);
    for (auto& [e, cnt] : edge_use) {
        ++degree[e.first];
        ++degree[e.second];
        if (cnt == 1) boundary[e.first] = boundary[e.second] = true;
    }
    // ccw chaining: the successor of (Q,i) is the quad whose outgoing edge from v is Q's incoming edge
    star.assign(n, {});
    for (int v = 0; v < n; ++v) {
        auto& list = inc[v];
        if (list.empty()) continue;
        auto succ = [&](const Corner& c) -> int {
            int prev = quads[c.quad][(c.slot + 3) % 4];
            for (int k = 0; k < static_cast<int>(list.size()); ++k)
                if (quads[list[k].quad][(list[k].slot + 1) % 4] == prev) return k;
            return -1;
        };
        auto pred = [&](const Corner& c) -> int {
            int next = quads[c.quad][(c.slot + 1) % 4];
            for (int k = 0; k < static_cast<int>(list.size()); ++k)
                if (quads[list[k].quad][(list[k].slot + 3) % 4] == next) return k;
            return -1;
        };
        int start = 0;
        for (int k = 0; k < static_cast<int>(list.size()); ++k)
            if (pred(list[k]) < 0) {
                start = k;
                break;
            }
        std::vector<char> seen(list.size(), 0);
        int k = start;
        while (k >= 0 && !seen[k]) {
            seen[k] = 1;
            star[v].push_back(list[k]);
            k = succ(list[k]);
        }
        if (star[v].size() != list.size()) throw InvalidGraph("vertex star is not a single fan");
    }
    whites.clear();
    white_index.assign(n, -1);
    for (int v = 0; v < n; ++v)
        if (kind[v] != VKind::Black) {
            white_index[v] = static_cast<int>(whites.size());
            whites.push_back(v);
        }
    white_edges.clear();
    for (const auto& Q : quads) white_edges.push_back({Q[0], Q[2]});
}

int SQuadGraph::rectangle_corner(int v) const {
    if (rect_I < 2 || kind[v] != VKind::S) return -1;
    int a = lattice[v][0], b = lattice[v][1];
    int A = 2 * (rect_I - 1), B = 2 * (rect_J - 1);
    if (a == 0 && b == 0) return 0;
    if (a == A && b == 0) return 1;
    if (a == A && b == B) return 2;
    if (a == 0 && b == B) return 3;
    return -1;
}

std::vector<int> SQuadGraph::corners() const {
    std::vector<int> out;
    if (rect_I >= 2) {
        out.assign(4, -1);
        for (int v = 0; v < num_vertices(); ++v) {
            int c = rectangle_corner(v);
            if (c >= 0) out[c] = v;
        }
        return out;
    }
    for (int v = 0; v < num_vertices(); ++v)
        if (is_white(v) && boundary[v] && star[v].size() == 1) out.push_back(v);
    return out;
}

QuadGraph grid_graph(int I, int J) {
    if (I < 2 || J < 2) throw DomainError("rectangle dimensions must be >= 2");
    QuadGraph G;
    G.num_vertices = I * J;
    auto id = [I](int i, int j) { return i + I * j; };
    G.coords.resize(I * J);
    for (int j = 0; j < J; ++j)
        for (int i = 0; i < I; ++i) G.coords[id(i, j)] = {i, j};
    for (int j = 0; j + 1 < J; ++j)
        for (int i = 0; i + 1 < I; ++i)
            G.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    for (int j = 0; j < J; ++j)
        for (int i = 0; i < I; ++i) {
            if (i + 1 < I) G.color[key(id(i, j), id(i + 1, j))] = EdgeColor::Horizontal;
            if (j + 1 < J) G.color[key(id(i, j), id(i, j + 1))] = EdgeColor::Vertical;
        }
    return G;
}

// Three half-grids [-n,n]x[0,n] glued cyclically along their bottom rays around one
// vertex, which becomes an interior vertex of degree 6.
QuadGraph umbilic_graph(int n) {
    if (n < 1) throw DomainError("umbilic sector size must be >= 1");
    QuadGraph G;
    std::map<std::array<int, 3>, int> ids;
    auto canon = [](int s, int i, int j) -> std::array<int, 3> {
        if (j == 0 && i == 0) return {0, 0, 0};
        if (j == 0 && i < 0) return {(s + 1) % 3, -i, 0};
        return {s, i, j};
    };
    auto id = [&](int s, int i, int j) {
        auto c = canon(s, i, j);
        auto it = ids.find(c);
        if (it != ids.end()) return it->second;
        int v = G.num_vertices++;
        ids[c] = v;
        G.coords.push_back({INT_MIN, INT_MIN});
        return v;
    };
    for (int s = 0; s < 3; ++s)
        for (int j = 0; j < n; ++j)
            for (int i = -n; i < n; ++i) {
                int a = id(s, i, j), b = id(s, i + 1, j), c = id(s, i + 1, j + 1), d = id(s, i, j + 1);
                G.faces.push_back({a, b, c, d});
                G.color[key(a, b)] = EdgeColor::Horizontal;
                G.color[key(d, c)] = EdgeColor::Horizontal;
                G.color[key(a, d)] = EdgeColor::Vertical;
                G.color[key(b, c)] = EdgeColor::Vertical;
            }
    return G;
}

SQuadGraph central_extension(const QuadGraph& G) {
    SQuadGraph g;
    int nv = G.num_vertices;
    g.kind.assign(nv, VKind::S);
    g.lattice.assign(nv, {INT_MIN, INT_MIN});
    bool has_coords = G.coords.size() == static_cast<std::size_t>(nv);
    for (int v = 0; v < nv && has_coords; ++v)
        if (G.coords[v][0] != INT_MIN) g.lattice[v] = {2 * G.coords[v][0], 2 * G.coords[v][1]};
    std::map<std::pair<int, int>, int> black;
    auto black_of = [&](int a, int b) {
        auto k = key(a, b);
        auto it = black.find(k);
        if (it != black.end()) return it->second;
        int id = static_cast<int>(g.kind.size());
        g.kind.push_back(VKind::Black);
        g.lattice.push_back({INT_MIN, INT_MIN});
        if (g.lattice[a][0] != INT_MIN && g.lattice[b][0] != INT_MIN)
            g.lattice[id] = {(g.lattice[a][0] + g.lattice[b][0]) / 2, (g.lattice[a][1] + g.lattice[b][1]) / 2};
        black[k] = id;
        return id;
    };
    for (const auto& f : G.faces) {
        if (f.size() != 4) throw InvalidGraph("central_extension: non-quadrilateral face");
        int c = static_cast<int>(g.kind.size());
        g.kind.push_back(VKind::C);
        g.lattice.push_back({INT_MIN, INT_MIN});
        bool all = true;
        int sa = 0, sb = 0;
        for (int v : f) {
            all = all && g.lattice[v][0] != INT_MIN;
            sa += g.lattice[v][0];
            sb += g.lattice[v][1];
        }
        if (all) g.lattice[c] = {sa / 4, sb / 4};
        for (int k = 0; k < 4; ++k) {
            int v = f[k], vn = f[(k + 1) % 4], vp = f[(k + 3) % 4];
            EdgeColor cout = G.edge_color(v, vn), cin = G.edge_color(vp, v);
            if (cout == cin) throw InvalidGraph("central_extension: face edges do not alternate colors");
            int bo = black_of(v, vn), bi = black_of(vp, v);
            g.quads.push_back({v, bo, c, bi});
            g.color[key(v, bo)] = cout;
            g.color[key(v, bi)] = cin;
            g.color[key(c, bo)] = other(cout);
            g.color[key(c, bi)] = other(cin);
        }
    }
    g.finalize();
    return g;
}

SQuadGraph build_rectangle(int I, int J) {
    SQuadGraph g = central_extension(grid_graph(I, J));
    g.rect_I = I;
    g.rect_J = J;
    return g;
}

SQuadGraph build_umbilic(int n) { return central_extension(umbilic_graph(n)); }

QuadGraph restrict_to_G(const SQuadGraph& g) {
    QuadGraph G;
    std::vector<int> map(g.num_vertices(), -1);
    for (int v = 0; v < g.num_vertices(); ++v)
        if (g.kind[v] == VKind::S) {
            map[v] = G.num_vertices++;
            G.coords.push_back(g.lattice[v][0] == INT_MIN ? std::array<int, 2>{INT_MIN, INT_MIN}
                                                          : std::array<int, 2>{g.lattice[v][0] / 2, g.lattice[v][1] / 2});
        }
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.kind[v] != VKind::C) continue;
        Ring r = ring_around(g, v);
        if (!r.closed) throw InvalidGraph("restrict_to_G: boundary face center");
        std::vector<int> f;
        for (int w : r.whites) f.push_back(map[w]);
        G.faces.push_back(f);
        for (std::size_t k = 0; k < r.whites.size(); ++k) {
            int b = r.blacks[(k + 1) % r.blacks.size()];
            int a = r.whites[k], c = r.whites[(k + 1) % r.whites.size()];
            G.color[key(map[a], map[c])] = g.edge_color(a, b);
        }
    }
    return G;
}

Ring ring_around(const SQuadGraph& g, int v) {
    Ring r;
    const auto& st = g.star[v];
    for (const auto& c : st) {
        const auto& Q = g.quads[c.quad];
        r.blacks.push_back(Q[(c.slot + 1) % 4]);
        r.whites.push_back(Q[(c.slot + 2) % 4]);
    }
    if (st.empty()) return r;
    const auto& last = g.quads[st.back().quad];
    int closing = last[(st.back().slot + 3) % 4];
    r.closed = !st.empty() && closing == r.blacks.front() && st.size() > 1;
    if (!r.closed) r.blacks.push_back(closing);
    return r;
}

std::vector<int> white_neighbors(const SQuadGraph& g, int v) {
    if (!g.is_white(v)) throw DomainError("white_neighbors: black vertex");
    return ring_around(g, v).whites;
}

std::vector<std::string> validate(const SQuadGraph& g) {
    std::vector<std::string> out;
    int n = g.num_vertices();
    std::set<std::pair<int, int>> edges;
    std::map<std::pair<int, int>, int> directed;
    for (std::size_t q = 0; q < g.quads.size(); ++q) {
        const auto& Q = g.quads[q];
        std::string tag = "quad " + std::to_string(q) + ": ";
        bool alt = true;
        for (int i = 0; i < 4; ++i) alt = alt && (g.kind[Q[i]] == VKind::Black) == (i % 2 == 1);
        if (!alt) {
            out.push_back("bipartite: " + tag + "white/black do not alternate");
            continue;
        }
        if (g.kind[Q[0]] == g.kind[Q[2]]) out.push_back("labeling: " + tag + "needs one S and one C white vertex");
        for (int i = 0; i < 4; ++i) {
            int a = Q[i], b = Q[(i + 1) % 4];
            edges.insert(key(a, b));
            ++directed[{a, b}];
            auto it = g.color.find(key(a, b));
            if (it == g.color.end()) {
                out.push_back("edge color: " + tag + "uncolored edge");
                continue;
            }
            auto jt = g.color.find(key(b, Q[(i + 2) % 4]));
            if (jt != g.color.end() && jt->second == it->second)
                out.push_back("edge color: " + tag + "colors do not alternate");
        }
    }
    for (auto& [e, cnt] : directed)
        if (cnt > 1) out.push_back("orientation: edge traversed twice in the same direction");
    std::vector<int> deg(n, 0);
    for (auto& e : edges) {
        ++deg[e.first];
        ++deg[e.second];
    }
    for (int v = 0; v < n; ++v) {
        bool bd = v < static_cast<int>(g.boundary.size()) && g.boundary[v];
        if (bd) continue;
        std::string tag = " at vertex " + std::to_string(v);
        if (g.kind[v] == VKind::Black && deg[v] != 4) out.push_back("black degree: interior black vertex of degree " + std::to_string(deg[v]) + tag);
        if (g.kind[v] == VKind::C && deg[v] != 4) out.push_back("center degree: interior C vertex of degree " + std::to_string(deg[v]) + tag);
        if (g.kind[v] == VKind::S && (deg[v] < 4 || deg[v] % 2)) out.push_back("vertex degree: interior S vertex of degree " + std::to_string(deg[v]) + tag);
    }
    // disk topology
    long V = 0;
    for (int v = 0; v < n; ++v) V += deg[v] > 0;
    long chi = V - static_cast<long>(edges.size()) + static_cast<long>(g.quads.size());
    if (chi != 1) out.push_back("topology: Euler characteristic " + std::to_string(chi) + " (expected 1)");
    return out;
}

std::string to_json(const SQuadGraph& g) {
    nlohmann::ordered_json j;
    j["schema"] = "cmcsurf.squadgraph/1";
    j["rectangle"] = {g.rect_I, g.rect_J};
    auto& vs = j["vertices"] = nlohmann::json::array();
    for (int v = 0; v < g.num_vertices(); ++v) {
        nlohmann::ordered_json e;
        e["id"] = v;
        e["kind"] = kind_name(g.kind[v]);
        if (g.lattice[v][0] != INT_MIN) e["lattice"] = g.lattice[v];
        vs.push_back(e);
    }
    j["quads"] = g.quads;
    auto& cs = j["edges"] = nlohmann::json::array();
    for (auto& [e, c] : g.color) cs.push_back({e.first, e.second, c == EdgeColor::Horizontal ? "H" : "V"});
    return j.dump(1);
}

SQuadGraph graph_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("graph document: ") + e.what());
    }
    if (j.value("schema", "") != "cmcsurf.squadgraph/1") throw ConfigError("graph document: unknown schema");
    SQuadGraph g;
    try {
        for (auto& e : j.at("vertices")) {
            int id = e.at("id");
            if (id != g.num_vertices()) throw ConfigError("graph document: vertex ids must be 0..n-1 in order");
            std::string k = e.at("kind");
            g.kind.push_back(k == "S" ? VKind::S : k == "C" ? VKind::C : VKind::Black);
            if (e.contains("lattice")) g.lattice.push_back(e["lattice"].get<std::array<int, 2>>());
            else g.lattice.push_back({INT_MIN, INT_MIN});
        }
        g.quads = j.at("quads").get<std::vector<std::array<int, 4>>>();
        for (auto& e : j.at("edges")) {
            int a = e.at(0), b = e.at(1);
            std::string c = e.at(2);
            g.color[key(a, b)] = c == "H" ? EdgeColor::Horizontal : EdgeColor::Vertical;
        }
        if (j.contains("rectangle")) {
            g.rect_I = j["rectangle"].at(0);
            g.rect_J = j["rectangle"].at(1);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("graph document: ") + e.what());
    }
    g.finalize();
    return g;
}

}  // namespace cmc
