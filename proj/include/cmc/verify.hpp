#pragma once
#include <string>
#include <vector>

#include "cmc/cmc.hpp"

namespace cmc {

struct CheckResult {
    std::string stage;
    std::string name;
    double worst = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool skipped = false;
    bool tainted = false;  // an earlier stage failed
    std::string note;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    std::string config_echo;  // JSON text, may be empty
    std::string input_hash;

    bool passed() const;
    const CheckResult* find(const std::string& name) const;
    std::string to_json() const;
};

struct Artifacts {
    const PatternSolution* solution = nullptr;
    const EmbeddedRingPattern* pattern = nullptr;
    const KoebePair* koebe = nullptr;
    const CmcPair* pair = nullptr;
};

struct Tolerances {
    double stationarity = 1e-8;
    double layout = 1e-6;
    double q_relation = 1e-9;
    double koebe = 1e-7;
    double planarity = 1e-8;
    double edge_lengths = 1e-8;
    double closure = 1e-7;
    double mean_curvature = 1e-6;
    double lambda = 1e-8;
    double alpha = 1e-7;
    double edge_normals = 1e-7;
};

// Every applicable invariant, in a fixed order; never throws.
VerificationReport run_all(const Artifacts& a, const Tolerances& tol = {});

// FNV-1a, hex encoded
std::string content_hash(const std::string& text);

// Root of the stationarity equation of the single interior white vertex with all other variables fixed,
// by a dense scan of (0, 2K) and bisection.
double brute_force_interior(const SQuadGraph& g, double q, Flavor flavor, const std::vector<double>& vars,
                            double tol = 1e-12);

}  // namespace cmc
