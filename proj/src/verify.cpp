#include "cmc/verify.hpp"
#include "cmc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>

#include <json.hpp>

namespace cmc {

namespace {

constexpr double kPi = std::numbers::pi;

using ordered_json = nlohmann::ordered_json;

struct Builder {
    VerificationReport& rep;
    std::string stage;
    bool upstream_failed = false;

    void add(const std::string& name, double worst, double tol, std::string note = {}) {
        CheckResult c;
        c.stage = stage;
        c.name = stage + "." + name;
        c.worst = worst;
        c.tolerance = tol;
        c.pass = std::isfinite(worst) && worst <= tol;
        c.tainted = upstream_failed;
        c.note = std::move(note);
        rep.checks.push_back(std::move(c));
    }
    // boolean condition reported with a signed margin
    void require(const std::string& name, bool ok, double margin, std::string note = {}) {
        add(name, margin, 0.0, std::move(note));
        rep.checks.back().pass = ok;
    }
    void skip(const std::string& name, const std::string& why) {
        CheckResult c;
        c.stage = stage;
        c.name = stage + "." + name;
        c.skipped = true;
        c.pass = true;
        c.tainted = upstream_failed;
        c.note = why;
        rep.checks.push_back(std::move(c));
    }
};

bool stage_failed(const VerificationReport& rep, const std::string& stage) {
    for (const auto& c : rep.checks)
        if (c.stage == stage && !c.skipped && !c.pass) return true;
    return false;
}

// runs fn, or marks every listed check failed with the exception text
void guarded(Builder& b, const std::vector<std::string>& names, const std::function<void()>& fn) {
    std::size_t mark = b.rep.checks.size();
    try {
        fn();
    } catch (const std::exception& e) {
        b.rep.checks.resize(mark);
        for (const auto& n : names) b.add(n, std::numeric_limits<double>::infinity(), 0.0, e.what());
    }
}

void pattern_checks(Builder& b, const Artifacts& a, const Tolerances& tol) {
    static const std::vector<std::string> names = {"variables-in-range", "stationarity"};
    if (!a.solution) {
        for (const auto& n : names) b.skip(n, "no pattern solution");
        return;
    }
    guarded(b, names, [&] {
        const auto& sol = *a.solution;
        const auto& g = *sol.graph;
        Modulus m(sol.q);
        int bad = 0;
        for (double x : sol.vars)
            if (!(x > 0 && (m.degenerate() || x < 2 * m.K))) ++bad;
        b.add("variables-in-range", bad, 0.0, "count outside (0, 2K)");
        auto [val, grad] = functional_value_grad(sol, sol.phi);
        (void)val;
        double worst = 0.0;
        for (int v : g.whites) {
            if (sol.boundary.kind == BoundaryKind::DirichletRadii && sol.boundary.fixed.count(v)) continue;
            worst = std::max(worst, std::abs(grad[g.white_index[v]]));
        }
        b.add("stationarity", worst, tol.stationarity, "gradient infinity norm over free vertices");
    });
}

void layout_checks(Builder& b, const Artifacts& a, const Tolerances& tol) {
    static const std::vector<std::string> names = {"normalization", "q-relation",   "incidence",  "neighbor-distance",
                                                   "orthogonality", "angle-sum", "orientation"};
    if (!a.pattern) {
        for (const auto& n : names) b.skip(n, "no embedded pattern");
        return;
    }
    guarded(b, names, [&] {
        LayoutResiduals r = layout_residuals(*a.pattern);
        b.add("normalization", r.normalization, tol.q_relation);
        b.add("q-relation", r.q_relation, tol.q_relation);
        b.add("incidence", r.incidence, tol.layout);
        b.add("neighbor-distance", r.neighbor_distance, tol.layout);
        b.add("orthogonality", r.orthogonality, tol.layout, "radians");
        b.add("angle-sum", r.angle_sum, tol.stationarity * 100, "interior kite angles vs 2pi");
        b.add("orientation", r.orientation_mismatches, 0.0,
              std::to_string(r.orientation_checked) + " closed rings checked");
    });
}

void koebe_checks(Builder& b, const Artifacts& a, const Tolerances& tol) {
    static const std::vector<std::string> names = {"radii-product",   "tangency",           "planarity",
                                                   "dual-orthogonality", "face-orthogonality", "touching-foot",
                                                   "edge-length-formulas", "edge-length-geometry", "face-centers",
                                                   "regularity",      "timelike-vertices"};
    if (!a.koebe) {
        for (const auto& n : names) b.skip(n, "no Koebe pair");
        return;
    }
    guarded(b, names, [&] {
        const auto& kp = *a.koebe;
        KoebeResiduals r = verify_koebe(kp);
        b.add("radii-product", std::abs(kp.rplus * kp.rminus - 1), 1e-12);
        b.add("tangency", r.tangency, tol.koebe);
        b.add("planarity", r.planarity, tol.planarity);
        b.add("dual-orthogonality", r.dual_orthogonality, tol.koebe);
        b.add("face-orthogonality", r.face_orthogonality, tol.koebe);
        b.add("touching-foot", r.diagonal_orthogonality, tol.koebe);
        b.add("edge-length-formulas", r.edge_length_formulas, tol.edge_lengths);
        b.add("edge-length-geometry", r.edge_length_geometry, tol.edge_lengths);
        b.add("face-centers", r.face_center_plane, tol.koebe);
        b.add("regularity", r.regularity_violations, 0.0, "closed rings whose touching points do not wind once");
        if (kp.flavor == Flavor::Hyperbolic) {
            int bad = 0;
            const auto& g = kp.graph();
            for (int v : g.whites)
                if (!(minkowski(kp.k[v], kp.k[v]) < 0 && kp.k[v][2] > 0)) ++bad;
            b.add("timelike-vertices", bad, 0.0, "vertices off the upper timelike cone");
        } else {
            b.skip("timelike-vertices", "spherical flavor");
        }
    });
}

void cmc_stage(Builder& b, const Artifacts& a, const Tolerances& tol) {
    static const std::vector<std::string> names = {
        "closure",      "gauss-map",     "mean-curvature",  "lambda",        "alpha",
        "edge-normals", "edge-normal-order", "face-normals", "touching",     "touching-dual",
        "face-circles", "spacelike-faces", "christoffel-dual"};
    if (!a.pair) {
        for (const auto& n : names) b.skip(n, "no cmc pair");
        return;
    }
    guarded(b, names, [&] {
        const auto& P = *a.pair;
        const auto& g = P.graph();
        b.add("closure", std::max(P.closure_c, P.closure_cstar), tol.closure, "worst quad " + std::to_string(P.worst_cycle));
        CmcChecks ck = cmc_checks(P);
        b.add("gauss-map", ck.gauss_map, tol.koebe, "|c* - c - k|");
        CurvatureReport cr = curvatures(P);
        b.add("mean-curvature", cr.mean_curvature_deviation, tol.mean_curvature,
              std::to_string(cr.H.size()) + " faces, max |H - 1|");
        b.add("lambda", ck.lambda_spread, tol.lambda, "lambda = " + std::to_string(P.radii.lambda));
        b.add("alpha", ck.alpha_spread, tol.alpha, "-2 alpha = " + std::to_string(ck.alpha));
        b.add("edge-normals", ck.edge_normal_spread, tol.edge_normals);
        if (P.flavor == Flavor::Hyperbolic) {
            double margin = std::max(ck.edge_normal_h, ck.edge_normal_v - ck.edge_normal_h);
            b.require("edge-normal-order", margin < 0, margin, "vertical < horizontal < 0");
        } else {
            b.skip("edge-normal-order", "spherical flavor");
        }
        b.add("face-normals", ck.face_normal, tol.koebe);
        b.add("touching", ck.touching, tol.koebe);
        b.add("touching-dual", ck.touching_dual, tol.koebe);
        b.add("face-circles", ck.face_circles, tol.koebe);
        if (P.flavor == Flavor::Hyperbolic)
            b.add("spacelike-faces", ck.faces_checked - ck.timelike_normals, 0.0,
                  std::to_string(ck.faces_checked) + " faces checked");
        else
            b.skip("spacelike-faces", "spherical flavor");
        int o = g.kind[P.origin] == VKind::S ? P.origin : -1;
        for (int v : g.whites)
            if (o < 0 && g.kind[v] == VKind::S) o = v;
        DualSurface D = christoffel_dual(g, P.c, P.radii.d, P.radii.lambda, o, P.cstar[o], 1e300);
        double diff = D.closure;
        for (int v : g.whites)
            if (g.kind[v] == VKind::S) diff = std::max(diff, (D.centers[v] - P.cstar[v]).norm());
        b.add("christoffel-dual", diff, tol.closure);
    });
}

}  // namespace

bool VerificationReport::passed() const {
    for (const auto& c : checks)
        if (!c.skipped && !c.pass) return false;
    return true;
}

const CheckResult* VerificationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string VerificationReport::to_json() const {
    ordered_json j;
    j["schema"] = "cmcsurf.report/1";
    j["passed"] = passed();
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) {
        ordered_json e;
        e["name"] = c.name;
        if (c.skipped) {
            e["status"] = "skipped";
        } else {
            e["status"] = c.pass ? "pass" : "fail";
            e["worst"] = std::isfinite(c.worst) ? ordered_json(c.worst) : ordered_json(nullptr);
            e["tolerance"] = c.tolerance;
        }
        if (c.tainted) e["tainted"] = true;
        if (!c.note.empty()) e["note"] = c.note;
        arr.push_back(std::move(e));
    }
    j["checks"] = std::move(arr);
    ordered_json prov;
    prov["input_hash"] = input_hash;
    prov["config"] = config_echo.empty() ? ordered_json(nullptr) : ordered_json::parse(config_echo);
    j["provenance"] = std::move(prov);
    return j.dump(2) + "\n";
}

std::string content_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

VerificationReport run_all(const Artifacts& a, const Tolerances& tol) {
    VerificationReport rep;
    Builder b{rep, "pattern"};
    pattern_checks(b, a, tol);
    bool failed = stage_failed(rep, "pattern");
    for (const char* stage : {"layout", "koebe", "cmc"}) {
        b.stage = stage;
        b.upstream_failed = failed;
        if (b.stage == "layout") layout_checks(b, a, tol);
        if (b.stage == "koebe") koebe_checks(b, a, tol);
        if (b.stage == "cmc") cmc_stage(b, a, tol);
        failed = failed || stage_failed(rep, stage);
    }
    return rep;
}

double brute_force_interior(const SQuadGraph& g, double q, Flavor flavor, const std::vector<double>& vars, double tol) {
    int interior = -1;
    for (int v : g.whites) {
        if (g.boundary[v]) continue;
        if (interior >= 0) throw DomainError("brute_force_interior: more than one interior vertex");
        interior = v;
    }
    if (interior < 0) throw DomainError("brute_force_interior: no interior vertex");
    Modulus m(q);
    if (m.degenerate()) throw DomainError("brute_force_interior: q must be below 1");
    std::vector<double> nb;
    for (int w : white_neighbors(g, interior)) nb.push_back(vars.at(g.white_index[w]));
    // interior stationarity: +-2pi + sum [g(x - y) -+ g(x + y)] = 0
    double phi = flavor == Flavor::Spherical ? 2 * kPi : -2 * kPi;
    double sgn = flavor == Flavor::Spherical ? -1.0 : 1.0;
    auto eq = [&](double x) {
        double s = phi;
        for (double y : nb) s += kernel_g(x - y, m) + sgn * kernel_g(x + y, m);
        return s;
    };
    const int samples = 4000;
    double h = 2 * m.K / samples;
    double a = h * 1e-6, fa = eq(a);
    for (int i = 1; i <= samples; ++i) {
        double b = i == samples ? 2 * m.K * (1 - 1e-12) : i * h;
        double fb = eq(b);
        if ((fa <= 0) != (fb <= 0)) {
            while (b - a > tol) {
                double c = 0.5 * (a + b), fc = eq(c);
                if ((fc <= 0) == (fa <= 0))
                    a = c, fa = fc;
                else
                    b = c;
            }
            return 0.5 * (a + b);
        }
        a = b;
        fa = fb;
    }
    throw NoRoot("brute_force_interior: no sign change on (0, 2K)");
}

}  // namespace cmc
