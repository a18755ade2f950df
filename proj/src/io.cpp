#include "cmc/io.hpp"
#include "cmc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cmc {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double pi_multiple(const json& j, const std::string& where) {
    double v;
    if (j.is_number()) v = j.get<double>();
    else if (j.is_string()) v = parse_pi_multiple(j.get<std::string>());
    else throw ConfigError(where + ": angle must be a number or a string like \"2/3\"");
    if (!std::isfinite(v)) throw ConfigError(where + ": angle is not finite");
    return v;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + ": not finite");
    return v;
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<int>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
    return j.get<bool>();
}

int vertex_key(const std::string& key, const std::string& where) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(key, &pos);
        if (pos != key.size() || v < 0) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": vertex key '" + key + "' is not a vertex id");
    }
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

double parse_pi_multiple(const std::string& text) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    auto num = [&](const std::string& s) {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("angle '" + text + "' is not a rational multiple of pi");
        }
        if (pos != s.size()) throw ConfigError("angle '" + text + "' is not a rational multiple of pi");
        return v;
    };
    auto slash = t.find('/');
    double v = slash == std::string::npos ? num(t) : num(t.substr(0, slash)) / num(t.substr(slash + 1));
    if (!std::isfinite(v)) throw ConfigError("angle '" + text + "' is not finite");
    return v;
}

PipelineConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, {"schema", "flavor", "graph", "q", "boundary", "solver", "layout", "verify", "search", "output", "replicate"},
               "config");
    PipelineConfig cfg;
    if (!j.contains("schema") || j["schema"] != "cmcsurf.config/1") throw ConfigError("config: schema must be \"cmcsurf.config/1\"");
    std::string flavor = j.value("flavor", std::string());
    if (flavor == "spherical") cfg.flavor = Flavor::Spherical;
    else if (flavor == "hyperbolic") cfg.flavor = Flavor::Hyperbolic;
    else throw ConfigError("config: flavor must be \"spherical\" or \"hyperbolic\"");

    if (!j.contains("graph")) throw ConfigError("config: missing graph");
    const json& gj = j["graph"];
    check_keys(gj, {"rectangle", "umbilic", "file"}, "graph");
    if (gj.size() != 1) throw ConfigError("graph: give exactly one of rectangle, umbilic, file");
    if (gj.contains("rectangle")) {
        const json& r = gj["rectangle"];
        if (!r.is_array() || r.size() != 2) throw ConfigError("graph.rectangle: expected [I, J]");
        cfg.I = integer(r[0], "graph.rectangle");
        cfg.J = integer(r[1], "graph.rectangle");
        if (cfg.I < 2 || cfg.J < 2) throw ConfigError("graph.rectangle: sizes must be at least 2");
    } else if (gj.contains("umbilic")) {
        cfg.umbilic = integer(gj["umbilic"], "graph.umbilic");
        if (cfg.umbilic < 1) throw ConfigError("graph.umbilic: radius must be positive");
    } else {
        if (!gj["file"].is_string()) throw ConfigError("graph.file: expected a path");
        cfg.graph_path = gj["file"].get<std::string>();
    }

    if (!j.contains("q")) throw ConfigError("config: missing q");
    if (j["q"].is_string()) {
        if (j["q"] != "search") throw ConfigError("q: expected a number or \"search\"");
        cfg.q_search = true;
    } else {
        cfg.q = number(j["q"], "q");
        if (!(cfg.q > 0 && cfg.q <= 1)) throw ConfigError("q: must lie in (0, 1]");
    }

    if (!j.contains("boundary")) throw ConfigError("config: missing boundary");
    const json& b = j["boundary"];
    check_keys(b, {"type", "corners", "side", "theta", "orientation", "value", "fixed"}, "boundary");
    std::string type = b.value("type", std::string("neumann"));
    if (type == "neumann") {
        cfg.kind = BoundaryKind::NeumannAngles;
        if (b.contains("value") || b.contains("fixed")) throw ConfigError("boundary: value/fixed belong to dirichlet data");
        if (b.contains("corners")) {
            const json& c = b["corners"];
            if (!c.is_array() || c.size() != 4) throw ConfigError("boundary.corners: expected four angles");
            for (int k = 0; k < 4; ++k) cfg.corners[k] = pi_multiple(c[k], "boundary.corners");
            cfg.has_corners = true;
        }
        if (b.contains("side")) cfg.side = pi_multiple(b["side"], "boundary.side");
        if (b.contains("theta") && !b["theta"].is_object()) throw ConfigError("boundary.theta: expected an object");
    } else if (type == "dirichlet") {
        cfg.kind = BoundaryKind::DirichletRadii;
        if (b.contains("corners") || b.contains("side") || b.contains("theta"))
            throw ConfigError("boundary: angles belong to neumann data");
        if (!b.contains("value") && !b.contains("fixed")) throw ConfigError("boundary: dirichlet data needs value or fixed");
        if (b.contains("value")) cfg.dirichlet = number(b["value"], "boundary.value");
        if (b.contains("fixed")) {
            if (!b["fixed"].is_object()) throw ConfigError("boundary.fixed: expected an object");
            for (auto it = b["fixed"].begin(); it != b["fixed"].end(); ++it)
                cfg.fixed[vertex_key(it.key(), "boundary.fixed")] = number(it.value(), "boundary.fixed");
        }
    } else {
        throw ConfigError("boundary.type: expected \"neumann\" or \"dirichlet\"");
    }
    if (b.contains("orientation")) {
        if (!b["orientation"].is_object()) throw ConfigError("boundary.orientation: expected an object");
        for (auto it = b["orientation"].begin(); it != b["orientation"].end(); ++it) {
            int s = integer(it.value(), "boundary.orientation");
            if (s != 1 && s != -1) throw ConfigError("boundary.orientation: values must be +1 or -1");
            cfg.orientation[vertex_key(it.key(), "boundary.orientation")] = s;
        }
    }

    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_keys(s, {"tol", "max_iter", "init_scale", "reclassify_orientation"}, "solver");
        if (s.contains("tol")) cfg.solver.tol = number(s["tol"], "solver.tol");
        if (s.contains("max_iter")) cfg.solver.max_iter = integer(s["max_iter"], "solver.max_iter");
        if (s.contains("init_scale")) cfg.solver.init_scale = number(s["init_scale"], "solver.init_scale");
        if (s.contains("reclassify_orientation"))
            cfg.solver.reclassify_orientation = boolean(s["reclassify_orientation"], "solver.reclassify_orientation");
        if (!(cfg.solver.tol > 0) || cfg.solver.max_iter < 1 || !(cfg.solver.init_scale > 0 && cfg.solver.init_scale < 1))
            throw ConfigError("solver: tol > 0, max_iter >= 1, 0 < init_scale < 1 required");
    }
    if (j.contains("layout")) {
        const json& l = j["layout"];
        check_keys(l, {"tol", "polish"}, "layout");
        if (l.contains("tol")) cfg.layout.tol = number(l["tol"], "layout.tol");
        if (l.contains("polish")) cfg.layout.polish = boolean(l["polish"], "layout.polish");
    }
    if (j.contains("verify")) {
        const json& v = j["verify"];
        check_keys(v, {"closure", "mean_curvature", "koebe", "layout"}, "verify");
        if (v.contains("closure")) cfg.tolerances.closure = number(v["closure"], "verify.closure");
        if (v.contains("mean_curvature")) cfg.tolerances.mean_curvature = number(v["mean_curvature"], "verify.mean_curvature");
        if (v.contains("koebe")) cfg.tolerances.koebe = number(v["koebe"], "verify.koebe");
        if (v.contains("layout")) cfg.tolerances.layout = number(v["layout"], "verify.layout");
    }
    if (j.contains("search")) {
        const json& s = j["search"];
        check_keys(s, {"criterion", "corner", "side", "target", "bracket", "tol", "max_iter"}, "search");
        if (s.contains("criterion")) {
            if (!s["criterion"].is_string()) throw ConfigError("search.criterion: expected a string");
            cfg.search.criterion = s["criterion"].get<std::string>();
        }
        static const std::set<std::string> known = {"kite_symmetry", "side_ratio", "side_fraction", "side_length", "synthetic"};
        if (!known.count(cfg.search.criterion)) throw ConfigError("search.criterion: unknown criterion '" + cfg.search.criterion + "'");
        if (s.contains("corner")) cfg.search.corner = integer(s["corner"], "search.corner");
        if (s.contains("side")) cfg.search.side = integer(s["side"], "search.side");
        if (s.contains("target")) cfg.search.target = number(s["target"], "search.target");
        if (s.contains("bracket")) {
            const json& br = s["bracket"];
            if (!br.is_array() || br.size() != 2) throw ConfigError("search.bracket: expected [lo, hi]");
            cfg.search.lo = number(br[0], "search.bracket");
            cfg.search.hi = number(br[1], "search.bracket");
        }
        if (s.contains("tol")) cfg.search.tol = number(s["tol"], "search.tol");
        if (s.contains("max_iter")) cfg.search.max_iter = integer(s["max_iter"], "search.max_iter");
        if (cfg.search.corner < 0 || cfg.search.corner > 3 || cfg.search.side < 0 || cfg.search.side > 3)
            throw ConfigError("search: corner and side must be in 0..3");
        if (!(cfg.search.lo > 0 && cfg.search.lo < cfg.search.hi && cfg.search.hi <= 1))
            throw ConfigError("search.bracket: need 0 < lo < hi <= 1");
        if (!(cfg.search.tol > 0)) throw ConfigError("search.tol: must be positive");
    }
    if (cfg.q_search && !j.contains("search")) throw ConfigError("q: \"search\" needs a search section");
    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, {"dir", "svg", "obj", "report"}, "output");
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) throw ConfigError("output.dir: expected a path");
            cfg.output.dir = o["dir"].get<std::string>();
        }
        if (o.contains("svg")) cfg.output.svg = boolean(o["svg"], "output.svg");
        if (o.contains("obj")) cfg.output.obj = boolean(o["obj"], "output.obj");
        if (o.contains("report")) cfg.output.report = boolean(o["report"], "output.report");
    }
    if (j.contains("replicate")) {
        cfg.replicate = integer(j["replicate"], "replicate");
        if (cfg.replicate < 0 || cfg.replicate > 1) throw ConfigError("replicate: expected 0 or 1");
    }
    if (cfg.has_corners && cfg.I == 0) throw ConfigError("boundary.corners: only rectangles have corners");
    if (b.contains("theta")) {
        for (auto it = b["theta"].begin(); it != b["theta"].end(); ++it)
            cfg.theta[vertex_key(it.key(), "boundary.theta")] = pi_multiple(it.value(), "boundary.theta");
    }
    cfg.echo = config_to_json(cfg);
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    PipelineConfig cfg = parse_config(text);
    if (!cfg.graph_path.empty() && std::filesystem::path(cfg.graph_path).is_relative())
        cfg.graph_path = (std::filesystem::path(path).parent_path() / cfg.graph_path).string();
    return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
    json j;
    j["schema"] = "cmcsurf.config/1";
    j["flavor"] = flavor_name(cfg.flavor);
    json g;
    if (cfg.I > 0) g["rectangle"] = json::array({cfg.I, cfg.J});
    else if (cfg.umbilic > 0) g["umbilic"] = cfg.umbilic;
    else g["file"] = cfg.graph_path;
    j["graph"] = g;
    j["q"] = cfg.q_search ? json("search") : json(cfg.q);
    json b;
    if (cfg.kind == BoundaryKind::NeumannAngles) {
        b["type"] = "neumann";
        if (cfg.has_corners) b["corners"] = json::array({cfg.corners[0], cfg.corners[1], cfg.corners[2], cfg.corners[3]});
        b["side"] = cfg.side;
        if (!cfg.theta.empty()) {
            json t = json::object();
            for (auto [v, a] : cfg.theta) t[std::to_string(v)] = a;
            b["theta"] = t;
        }
    } else {
        b["type"] = "dirichlet";
        b["value"] = cfg.dirichlet;
        if (!cfg.fixed.empty()) {
            json t = json::object();
            for (auto [v, a] : cfg.fixed) t[std::to_string(v)] = a;
            b["fixed"] = t;
        }
    }
    if (!cfg.orientation.empty()) {
        json t = json::object();
        for (auto [v, s] : cfg.orientation) t[std::to_string(v)] = s;
        b["orientation"] = t;
    }
    j["boundary"] = b;
    j["solver"] = {{"tol", cfg.solver.tol},
                   {"max_iter", cfg.solver.max_iter},
                   {"init_scale", cfg.solver.init_scale},
                   {"reclassify_orientation", cfg.solver.reclassify_orientation}};
    j["layout"] = {{"tol", cfg.layout.tol}, {"polish", cfg.layout.polish}};
    j["verify"] = {{"closure", cfg.tolerances.closure},
                   {"mean_curvature", cfg.tolerances.mean_curvature},
                   {"koebe", cfg.tolerances.koebe},
                   {"layout", cfg.tolerances.layout}};
    j["search"] = {{"criterion", cfg.search.criterion},
                   {"corner", cfg.search.corner},
                   {"side", cfg.search.side},
                   {"target", cfg.search.target},
                   {"bracket", json::array({cfg.search.lo, cfg.search.hi})},
                   {"tol", cfg.search.tol},
                   {"max_iter", cfg.search.max_iter}};
    j["output"] = {{"dir", cfg.output.dir}, {"svg", cfg.output.svg}, {"obj", cfg.output.obj}, {"report", cfg.output.report}};
    j["replicate"] = cfg.replicate;
    return j.dump();
}

std::shared_ptr<SQuadGraph> build_graph(const PipelineConfig& cfg) {
    if (cfg.I > 0) return std::make_shared<SQuadGraph>(build_rectangle(cfg.I, cfg.J));
    if (cfg.umbilic > 0) return std::make_shared<SQuadGraph>(build_umbilic(cfg.umbilic));
    std::string text;
    try {
        text = read_text(cfg.graph_path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return std::make_shared<SQuadGraph>(graph_from_json(text));
}

BoundaryData build_boundary(const PipelineConfig& cfg, const SQuadGraph& g) {
    constexpr double pi = std::numbers::pi;
    BoundaryData bd;
    bd.kind = cfg.kind;
    auto check_vertex = [&](int v, const char* where) {
        if (v >= g.num_vertices() || !g.is_white(v) || !g.boundary[v])
            throw ConfigError(std::string(where) + ": vertex " + std::to_string(v) + " is not a boundary white vertex");
    };
    if (cfg.kind == BoundaryKind::NeumannAngles) {
        if (g.rect_I >= 2) {
            bd = rectangle_angles(g, {cfg.corners[0] * pi, cfg.corners[1] * pi, cfg.corners[2] * pi, cfg.corners[3] * pi},
                                  cfg.side * pi);
        } else {
            for (int v : g.whites)
                if (g.boundary[v]) bd.theta[v] = cfg.side * pi;
        }
        for (auto [v, a] : cfg.theta) {
            check_vertex(v, "boundary.theta");
            bd.theta[v] = a * pi;
        }
    } else {
        for (int v : g.whites)
            if (g.boundary[v]) bd.fixed[v] = cfg.dirichlet;
        for (auto [v, x] : cfg.fixed) {
            check_vertex(v, "boundary.fixed");
            bd.fixed[v] = x;
        }
    }
    for (auto [v, s] : cfg.orientation) {
        check_vertex(v, "boundary.orientation");
        bd.orientation[v] = s;
    }
    return bd;
}

std::string obj_text(const std::vector<ObjGroup>& groups, const std::string& echo) {
    std::ostringstream os;
    os << "# cmcsurf mesh\n";
    if (!echo.empty()) os << "# config: " << echo << "\n";
    int base = 1;
    for (const auto& g : groups) {
        os << "o " << g.name << "\n";
        for (const auto& v : g.vertices) os << "v " << fmt(v[0]) << " " << fmt(v[1]) << " " << fmt(v[2]) << "\n";
        for (const auto& f : g.faces) {
            if (f.size() <= 4) {
                os << "f";
                for (int i : f) os << " " << i + base;
                os << "\n";
            } else {
                for (std::size_t i = 1; i + 1 < f.size(); ++i)
                    os << "f " << f[0] + base << " " << f[i] + base << " " << f[i + 1] + base << "\n";
            }
        }
        base += static_cast<int>(g.vertices.size());
    }
    return os.str();
}

namespace {

// vertices of one white kind, faces around the closed rings of the other kind
ObjGroup net_over(const SQuadGraph& g, VKind vkind, const std::vector<Vec3>& values, const std::string& name) {
    ObjGroup out;
    out.name = name;
    std::vector<int> index(g.num_vertices(), -1);
    for (int v : g.whites) {
        if (g.kind[v] != vkind) continue;
        index[v] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(values[v]);
    }
    for (int v : g.whites) {
        if (g.kind[v] == vkind) continue;
        Ring ring = ring_around(g, v);
        if (!ring.closed) continue;
        std::vector<int> f;
        for (int w : ring.whites) f.push_back(index[w]);
        out.faces.push_back(f);
    }
    return out;
}

}  // namespace

ObjGroup koebe_net_obj(const KoebePair& kp, VKind net) {
    return net_over(kp.graph(), net, kp.k, net == VKind::S ? "koebe_s" : "koebe_c");
}

ObjGroup surface_obj(const SQuadGraph& g, const std::vector<Vec3>& values, const std::string& name) {
    return net_over(g, VKind::S, values, name);
}

std::string solution_json(const PatternSolution& sol, const EmbeddedRingPattern* pat, const std::string& echo) {
    const auto& g = *sol.graph;
    json j;
    j["schema"] = "cmcsurf.solution/1";
    j["flavor"] = flavor_name(sol.flavor);
    j["q"] = sol.q;
    j["residual"] = sol.residual;
    j["iterations"] = sol.iterations;
    json verts = json::array();
    for (int v : g.whites) {
        json e;
        e["id"] = v;
        e["kind"] = g.kind[v] == VKind::S ? "s" : "c";
        if (!g.lattice.empty()) e["lattice"] = json::array({g.lattice[v][0], g.lattice[v][1]});
        e["boundary"] = static_cast<bool>(g.boundary[v]);
        e["var"] = sol.var(v);
        if (pat) {
            e["r"] = pat->radii[v].r;
            e["R"] = pat->radii[v].R;
            e["center"] = vec_json(pat->centers[v]);
        }
        verts.push_back(e);
    }
    j["whites"] = verts;
    if (pat) {
        json touch = json::array();
        for (int b = 0; b < g.num_vertices(); ++b)
            if (!g.is_white(b)) touch.push_back({{"id", b}, {"point", vec_json(pat->touch[b])}});
        j["touch"] = touch;
        j["layout_residual"] = pat->residual;
    }
    j["config"] = echo.empty() ? json(nullptr) : json::parse(echo);
    return j.dump(2) + "\n";
}

std::string annotate_svg(const std::string& svg, const std::string& echo) {
    if (echo.empty()) return svg;
    auto open = svg.find("<svg");
    auto end = open == std::string::npos ? open : svg.find('>', open);
    if (end == std::string::npos) return svg;
    std::string body;
    for (std::size_t i = 0; i < echo.size(); ++i) {
        body += echo[i];
        if (echo[i] == '-' && i + 1 < echo.size() && echo[i + 1] == '-') body += ' ';
    }
    if (!body.empty() && body.back() == '-') body += ' ';
    return svg.substr(0, end + 1) + "\n<!-- config: " + body + " -->" + svg.substr(end + 1);
}

void write_text(const std::string& path, const std::string& text) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << text;
    if (!os) throw Error("cannot write " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace cmc
