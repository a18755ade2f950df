#include "cmc/pipeline.hpp"

#include <climits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "json.hpp"

namespace cmc {

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Solve: return "solve";
        case Stage::Embed: return "embed";
        case Stage::Lift: return "lift";
        case Stage::Build: return "build";
        case Stage::Verify: return "verify";
    }
    return "?";
}

int exit_code_for(const std::exception& e) {
    if (auto* s = dynamic_cast<const StageFailure*>(&e)) return s->exit_code;
    if (dynamic_cast<const NonConvergence*>(&e) || dynamic_cast<const InfeasibleBoundary*>(&e) ||
        dynamic_cast<const SaddleEscape*>(&e) || dynamic_cast<const NoBracket*>(&e) ||
        dynamic_cast<const NoRoot*>(&e) || dynamic_cast<const NonConvergentFamily*>(&e))
        return 3;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidGraph*>(&e) ||
        dynamic_cast<const nlohmann::json::exception*>(&e))
        return 4;
    return 2;
}

namespace {

using json = nlohmann::ordered_json;

template <class F>
auto staged(Stage s, F&& fn) {
    try {
        return fn();
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure(s, e.what(), exit_code_for(e));
    }
}

std::map<std::pair<int, int>, int> lattice_index(const SQuadGraph& g) {
    std::map<std::pair<int, int>, int> out;
    for (int v : g.whites)
        if (g.lattice[v][0] != INT_MIN) out[{g.lattice[v][0], g.lattice[v][1]}] = v;
    return out;
}

int sgn(int x) { return (x > 0) - (x < 0); }

// S vertices of rectangle side k (from corner k to corner k+1), in order
std::vector<int> side_vertices(const SQuadGraph& g, int k) {
    auto cs = g.corners();
    if (cs.size() != 4 || cs[0] < 0) throw DomainError("rectangle sides need a rectangle graph");
    auto at = lattice_index(g);
    int a = cs[k], b = cs[(k + 1) % 4];
    int dx = 2 * sgn(g.lattice[b][0] - g.lattice[a][0]), dy = 2 * sgn(g.lattice[b][1] - g.lattice[a][1]);
    std::vector<int> out{a};
    while (out.back() != b) {
        auto it = at.find({g.lattice[out.back()][0] + dx, g.lattice[out.back()][1] + dy});
        if (it == at.end()) throw DomainError("rectangle side is not a lattice line");
        out.push_back(it->second);
    }
    return out;
}

// best-fit plane of points: (point, Euclidean unit normal, max distance)
std::tuple<Vec3, Vec3, double> fit_plane(const std::vector<Vec3>& pts) {
    Vec3 m = Vec3::Zero();
    for (const auto& p : pts) m += p;
    m /= static_cast<double>(pts.size());
    Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
    for (const auto& p : pts) C += (p - m) * (p - m).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(C);
    Vec3 n = es.eigenvectors().col(0);
    double worst = 0;
    for (const auto& p : pts) worst = std::max(worst, std::abs(n.dot(p - m)));
    return {m, n, worst};
}

std::string summary_line(const CmcPair& pair) {
    auto curv = curvatures(pair);
    auto chk = cmc_checks(pair);
    char buf[256];
    std::snprintf(buf, sizeof buf, "faces %zu  max|H-1| %.3e  lambda %.12g  -2alpha %.12g  closure %.3e",
                  curv.faces.size(), curv.mean_curvature_deviation, pair.radii.lambda, chk.alpha,
                  std::max(pair.closure_c, pair.closure_cstar));
    return buf;
}

}  // namespace

std::array<double, 4> corner_sides(const EmbeddedRingPattern& pat) {
    const auto& g = pat.graph();
    Flavor f = pat.flavor;
    std::array<double, 4> out{};
    for (int k = 0; k < 4; ++k) {
        auto side = side_vertices(g, k);
        const Vec3& pa = pat.centers[side.front()];
        const Vec3& pb = pat.centers[side.back()];
        Vec3 u = tangent_toward(f, pa, pat.centers[side[1]]);
        double y = dot(f, pb, u), x = dot(f, pb, pa);
        if (f == Flavor::Spherical) {
            out[k] = std::atan2(y, x);
        } else {
            double t = y / -x;
            if (std::abs(t) >= 1) throw DomainError("corner centre off the geodesic of its side");
            out[k] = std::atanh(t);
        }
    }
    return out;
}

double closing_residual(const SearchSpec& spec, const EmbeddedRingPattern& pat) {
    if (spec.criterion == "synthetic") return pat.q - spec.target;
    auto s = corner_sides(pat);
    int c = spec.corner, prev = (spec.corner + 3) % 4;
    if (spec.criterion == "kite_symmetry") {
        double den = s[prev] + s[c];
        if (den == 0) throw DomainError("kite_symmetry: sides at the corner sum to zero");
        return (s[prev] - s[c]) / den;
    }
    if (spec.criterion == "side_ratio") {
        if (s[c] == 0) throw DomainError("side_ratio: zero side");
        return s[prev] / s[c] - spec.target;
    }
    if (spec.criterion == "side_fraction") {
        double total = std::abs(s[0]) + std::abs(s[1]) + std::abs(s[2]) + std::abs(s[3]);
        return s[spec.side] / total - spec.target;
    }
    if (spec.criterion == "side_length") return s[spec.side] - spec.target;
    throw ConfigError("unknown closing criterion '" + spec.criterion + "'");
}

SearchResult find_root(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iter) {
    SearchResult res;
    double a = lo, b = hi, fa = f(a), fb = f(b);
    res.trace = {{a, fa}, {b, fb}};
    if (fa == 0) return {a, 0.0, 0, res.trace};
    if (fb == 0) return {b, 0.0, 0, res.trace};
    if ((fa > 0) == (fb > 0)) throw NoBracket("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    int side = 0;
    for (int it = 1; it <= max_iter; ++it) {
        double x = (a * fb - b * fa) / (fb - fa);
        if (!(x > std::min(a, b) && x < std::max(a, b))) x = (a + b) / 2;
        double fx = f(x);
        res.trace.push_back({x, fx});
        res.iterations = it;
        if ((fx > 0) == (fb > 0)) {
            b = x;
            fb = fx;
            if (side == -1) fa /= 2;
            side = -1;
        } else {
            a = x;
            fa = fx;
            if (side == 1) fb /= 2;
            side = 1;
        }
        if (fx == 0 || std::abs(b - a) < tol) {
            res.q = x;
            res.residual = fx;
            return res;
        }
    }
    throw NonConvergence("root search did not reach tolerance", std::abs(b - a));
}

SearchResult search_q(const PipelineConfig& cfg) {
    const auto& spec = cfg.search;
    if (spec.criterion == "synthetic")
        return find_root([&](double q) { return q - spec.target; }, spec.lo, spec.hi, spec.tol, spec.max_iter);
    auto g = build_graph(cfg);
    if (g->rect_I < 2) throw ConfigError("search: side criteria need a rectangle graph");
    if (spec.hi >= 1) throw ConfigError("search: the bracket must stay below q = 1");
    auto bd = build_boundary(cfg, *g);
    auto f = [&](double q) {
        auto sol = solve(g, q, cfg.flavor, bd, cfg.solver);
        return closing_residual(spec, embed(sol, cfg.layout));
    };
    auto safe = [&](double q) -> std::optional<double> {
        try {
            return f(q);
        } catch (const Error&) {
            return std::nullopt;
        }
    };
    // coarse scan in log(1 - q) so that a failing end of the bracket does not stop the search
    const int n = 12;
    std::vector<std::pair<double, double>> scan;
    double la = std::log(1 - spec.lo), lb = std::log(1 - spec.hi);
    for (int i = 0; i <= n; ++i) {
        double q = 1 - std::exp(la + (lb - la) * i / n);
        if (auto v = safe(q)) {
            if (!scan.empty() && (scan.back().second > 0) != (*v > 0)) {
                auto res = find_root(f, scan.back().first, q, spec.tol, spec.max_iter);
                res.trace.insert(res.trace.begin(), scan.begin(), scan.end());
                return res;
            }
            scan.push_back({q, *v});
        }
    }
    if (scan.empty()) throw NonConvergence("search: no q in the bracket could be solved", INFINITY);
    throw NoBracket("search: closing residual does not change sign on [" + std::to_string(spec.lo) + ", " +
                    std::to_string(spec.hi) + "]");
}

std::vector<std::vector<Vec3>> reflect_across_sides(const SQuadGraph& g, Flavor f, const std::vector<Vec3>& values,
                                                    double* fit) {
    std::vector<std::vector<Vec3>> out;
    double worst = 0, scale = 0;
    for (int v : g.whites)
        if (g.kind[v] == VKind::S) scale = std::max(scale, values[v].norm());
    for (int k = 0; k < 4; ++k) {
        std::vector<Vec3> pts;
        for (int v : side_vertices(g, k)) pts.push_back(values[v]);
        auto [p, ne, dist] = fit_plane(pts);
        worst = std::max(worst, dist / std::max(scale, 1e-300));
        // metric normal: <N, x> = ne . x
        Vec3 N = ne;
        if (f == Flavor::Hyperbolic) N[2] = -N[2];
        double nn = sqnorm(f, N);
        if (std::abs(nn) < 1e-12) throw DegenerateFace("reflection plane is lightlike");
        std::vector<Vec3> r(values.size());
        for (std::size_t v = 0; v < values.size(); ++v) r[v] = values[v] - 2 * dot(f, values[v] - p, N) / nn * N;
        out.push_back(std::move(r));
    }
    if (fit) *fit = worst;
    return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, Stage upto, bool write) {
    PipelineResult res;
    namespace fs = std::filesystem;
    auto out = [&](const std::string& name, const std::string& text) {
        std::string path = (fs::path(cfg.output.dir) / name).string();
        write_text(path, text);
        res.files.push_back(path);
    };

    auto g = build_graph(cfg);
    auto bd = build_boundary(cfg, *g);
    double q = cfg.q;
    if (cfg.q_search) q = staged(Stage::Solve, [&] { return search_q(cfg).q; });

    res.solution = staged(Stage::Solve, [&] { return solve(g, q, cfg.flavor, bd, cfg.solver); });
    if (upto == Stage::Solve) {
        if (write) out("solution.json", solution_json(res.solution, nullptr, cfg.echo));
        return res;
    }
    res.pattern = staged(Stage::Embed, [&] { return embed(res.solution, cfg.layout); });
    if (write) {
        out("solution.json", solution_json(res.solution, &*res.pattern, cfg.echo));
        if (cfg.output.svg) out("pattern.svg", annotate_svg(pattern_svg(*res.pattern), cfg.echo));
    }
    if (upto == Stage::Embed) return res;

    res.koebe = staged(Stage::Lift, [&] { return lift(*res.pattern, cfg.tolerances.koebe); });
    if (write && cfg.output.obj) {
        out("koebe_s.obj", obj_text({koebe_net_obj(*res.koebe, VKind::S)}, cfg.echo));
        out("koebe_c.obj", obj_text({koebe_net_obj(*res.koebe, VKind::C)}, cfg.echo));
    }
    if (upto == Stage::Lift) return res;

    res.pair = staged(Stage::Build, [&] {
        return integrate_one_forms(*res.koebe, cmc_radii(res.solution), cfg.tolerances.closure);
    });
    res.summary = staged(Stage::Build, [&] { return summary_line(*res.pair); });
    if (write && cfg.output.obj) {
        const auto& p = *res.pair;
        out("surface_c.obj", obj_text({surface_obj(*g, p.c, "surface_c")}, cfg.echo));
        out("surface_cstar.obj", obj_text({surface_obj(*g, p.cstar, "surface_cstar")}, cfg.echo));
        out("gauss_n.obj", obj_text({surface_obj(*g, p.n, "gauss_n")}, cfg.echo));
        if (cfg.replicate > 0 && g->rect_I >= 2) {
            std::vector<ObjGroup> groups{surface_obj(*g, p.c, "patch")};
            double fit = 0;
            auto copies = staged(Stage::Build, [&] { return reflect_across_sides(*g, cfg.flavor, p.c, &fit); });
            for (int k = 0; k < 4; ++k) groups.push_back(surface_obj(*g, copies[k], "reflect_" + std::to_string(k)));
            char buf[64];
            std::snprintf(buf, sizeof buf, "  side-plane fit %.3e", fit);
            res.summary += buf;
            out("surface_c_replicated.obj", obj_text(groups, cfg.echo));
        }
    }
    if (upto == Stage::Build) return res;

    Artifacts a{&res.solution, &*res.pattern, &*res.koebe, &*res.pair};
    res.report = run_all(a, cfg.tolerances);
    res.report->config_echo = cfg.echo;
    res.report->input_hash = content_hash(cfg.echo);
    if (write && cfg.output.report) {
        json j = json::parse(res.report->to_json());
        j["summary"] = res.summary;
        j["q"] = q;
        out("report.json", j.dump(2) + "\n");
    }
    return res;
}

}  // namespace cmc
