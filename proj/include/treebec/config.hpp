#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treebec/graph.hpp"
#include "treebec/thermo.hpp"

namespace treebec {

struct Tolerances {
    double eig = 1e-10;
    double solve = 1e-10;
    double secular = 1e-12;
    double transience_gap = 1e-3;
};

struct RunConfig {
    graph::ModelSpec model{graph::Kind::HQ, 3, 2, graph::Mode::DiagonalUnit};
    std::vector<int> n_range{6, 7, 8, 9, 10};
    std::vector<double> beta{1.0};
    thermo::ScheduleRule schedule{thermo::Rule::Fregg3, 1.0};
    Tolerances tol;
    int transience_probes = 20;
    std::vector<int> norm_levels;  // empty: model default
    std::string output_dir = "out";
    std::int64_t dense_limit = 4096;
    std::vector<std::int32_t> probes{0};
    int grid_points = 2001;
    int k_max = 200;
    double divergence_factor = 4.0;
};

// Throws ConfigError on any schema or range violation.
RunConfig parse_config(const std::string& json_text);
void validate(const RunConfig& c);
std::vector<int> parse_n_range(const std::string& text);  // "4..12" or "6,8,10"

// Key-sorted JSON with every field present; equal configs give equal text.
std::string canonical_json(const RunConfig& c);
std::string config_hash(const RunConfig& c);  // FNV-1a of the canonical text minus the output directory, 16 hex digits

}  // namespace treebec
