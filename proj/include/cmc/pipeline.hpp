#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cmc/errors.hpp"
#include "cmc/io.hpp"

namespace cmc {

enum class Stage { Solve, Embed, Lift, Build, Verify };

const char* stage_name(Stage s);

// A module error annotated with the pipeline stage it came from and the CLI exit code it maps to.
struct StageFailure : Error {
    Stage stage;
    int exit_code;
    StageFailure(Stage s, const std::string& what, int code)
        : Error(std::string(stage_name(s)) + ": " + what), stage(s), exit_code(code) {}
};

// 0 pass, 2 verification/geometry failure, 3 solver non-convergence, 4 configuration error
int exit_code_for(const std::exception& e);

struct PipelineResult {
    PatternSolution solution;
    std::optional<EmbeddedRingPattern> pattern;
    std::optional<KoebePair> koebe;
    std::optional<CmcPair> pair;
    std::optional<VerificationReport> report;
    std::string summary;
    std::vector<std::string> files;
};

// Runs solve -> embed -> lift -> build -> verify up to `upto`; writes artifacts when `write` is set.
PipelineResult run_pipeline(const PipelineConfig& cfg, Stage upto = Stage::Verify, bool write = true);

// Boundary shape of an embedded rectangle pattern: signed geodesic side lengths between corner centres.
std::array<double, 4> corner_sides(const EmbeddedRingPattern& pat);

double closing_residual(const SearchSpec& spec, const EmbeddedRingPattern& pat);

struct SearchResult {
    double q = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::vector<std::pair<double, double>> trace;  // (q, residual)
};

// Bracketed root of f on [lo, hi] (Illinois false position with bisection fallback) to `tol` in q.
SearchResult find_root(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iter);

// Tunes q so that the pattern satisfies the configured closing criterion.
SearchResult search_q(const PipelineConfig& cfg);

// Reflections of a surface across the best-fit planes of the four rectangle sides; returns the
// worst plane-fit residual through `fit`.
std::vector<std::vector<Vec3>> reflect_across_sides(const SQuadGraph& g, Flavor f, const std::vector<Vec3>& values,
                                                    double* fit = nullptr);

}  // namespace cmc
