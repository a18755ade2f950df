#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "cmc/pipeline.hpp"
#include "json.hpp"

using namespace cmc;

namespace {

struct Common {
    std::string config;
    std::string out;
    double tol = 0;
    double q = 0;
    bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config, "configuration JSON")->required();
    cmd->add_option("-o,--out", c.out, "output directory (overrides output.dir)");
    cmd->add_option("--tol", c.tol, "solver gradient tolerance");
    cmd->add_option("--q", c.q, "fixed q in (0, 1], overrides the config");
    cmd->add_flag("-v,--verbose", c.verbose, "print every check");
}

PipelineConfig configure(const Common& c) {
    PipelineConfig cfg = load_config(c.config);
    if (!c.out.empty()) cfg.output.dir = c.out;
    if (c.tol > 0) cfg.solver.tol = c.tol;
    if (c.q != 0) {
        if (!(c.q > 0 && c.q <= 1)) throw ConfigError("--q must lie in (0, 1]");
        cfg.q = c.q;
        cfg.q_search = false;
    }
    cfg.echo = config_to_json(cfg);
    return cfg;
}

void print_report(const VerificationReport& rep, bool verbose) {
    for (const auto& c : rep.checks) {
        if (!verbose && (c.pass || c.skipped)) continue;
        const char* status = c.skipped ? "skip" : c.pass ? "pass" : "FAIL";
        std::printf("  %-4s %-32s %.3e / %.1e%s%s%s\n", status, c.name.c_str(), c.worst, c.tolerance,
                    c.tainted ? " (tainted)" : "", c.note.empty() ? "" : "  ", c.note.c_str());
    }
}

int run_stage(const Common& c, Stage upto, bool all_checks) {
    PipelineConfig cfg = configure(c);
    PipelineResult r = run_pipeline(cfg, upto);
    std::printf("%s: q %.12g  solver residual %.3e in %d iterations\n", stage_name(upto), r.solution.q,
                r.solution.residual, r.solution.iterations);
    if (r.pattern) std::printf("  layout residual %.3e\n", r.pattern->residual);
    if (!r.summary.empty()) std::printf("  %s\n", r.summary.c_str());
    if (c.verbose)
        for (const auto& f : r.files) std::printf("  wrote %s\n", f.c_str());
    if (r.report) {
        print_report(*r.report, c.verbose || all_checks);
        std::printf("verification %s\n", r.report->passed() ? "passed" : "FAILED");
        if (!r.report->passed()) return 2;
    }
    return 0;
}

int run_search(const Common& c) {
    PipelineConfig cfg = configure(c);
    SearchResult s = search_q(cfg);
    if (c.verbose)
        for (auto [q, f] : s.trace) std::printf("  q %.12f  residual % .6e\n", q, f);
    std::printf("search-q: %s q %.10f  residual %.3e  iterations %d\n", cfg.search.criterion.c_str(), s.q, s.residual,
                s.iterations);
    nlohmann::ordered_json j;
    j["schema"] = "cmcsurf.search/1";
    j["criterion"] = cfg.search.criterion;
    j["q"] = s.q;
    j["residual"] = s.residual;
    j["iterations"] = s.iterations;
    j["trace"] = s.trace;
    j["config"] = nlohmann::ordered_json::parse(cfg.echo);
    std::string path = (std::filesystem::path(cfg.output.dir) / "search.json").string();
    write_text(path, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete cmc surfaces from orthogonal ring patterns"};
    app.require_subcommand(1);
    struct Cmd {
        const char* name;
        const char* help;
        Stage upto;
    };
    const Cmd cmds[] = {
        {"solve", "solve the ring-pattern variational problem", Stage::Solve},
        {"embed", "solve and lay out the ring pattern", Stage::Embed},
        {"lift", "lift the pattern to the Koebe net pair", Stage::Lift},
        {"build", "integrate the cmc surface, its parallel surface and Gauss map", Stage::Build},
        {"verify", "build and print every verification check", Stage::Verify},
        {"pipeline", "run every stage and write all artifacts", Stage::Verify},
    };
    Common common;
    std::vector<std::pair<CLI::App*, Stage>> stages;
    for (const auto& c : cmds) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, common);
        stages.push_back({sub, c.upto});
    }
    auto* search = app.add_subcommand("search-q", "tune q to the configured closing criterion");
    add_common(search, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }
    try {
        if (search->parsed()) return run_search(common);
        for (auto [sub, upto] : stages)
            if (sub->parsed()) return run_stage(common, upto, sub->get_name() == "verify");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    }
    return 4;
}
