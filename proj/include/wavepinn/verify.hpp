#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavepinn/network.hpp"
#include "wavepinn/normalize.hpp"
#include "wavepinn/problems.hpp"

namespace wavepinn {

/// Central-difference comparison of the derivative engine against the plain
/// forward evaluation, plus a parameter-gradient check against loss finite
/// differences on a small batch. Parameters are spot-checked on a sampled
/// subset covering every layer (full parameter sweeps would be quadratic).
struct GradCheckReport {
    struct Row {
        uint64_t seed = 0;
        int subnets = 0;
        bool fourier = true;
        double max_rel_bundle = 0;
        double max_rel_param = 0;
    };
    std::vector<Row> rows;
    double tol_bundle = 1e-5;
    double tol_param = 1e-4;
    bool passed = false;
};

GradCheckReport run_gradcheck(int n_seeds = 20, const std::vector<int>& subnet_counts = {1, 3, 10},
                              int params_per_layer = 4);
std::string format_report(const GradCheckReport& r);

/// Largest residual magnitudes of each built-in exact solution under every
/// normalization mode, sampled at random interior/boundary/initial points.
struct ResidualReport {
    struct Row {
        std::string problem;
        NormMode mode = NormMode::None;
        double max_pde = 0;
        double max_bc = 0;
        double max_ic_value = 0;
        double max_ic_velocity = 0;
    };
    std::vector<Row> rows;
    double tolerance = 1e-9;
    bool passed = false;
};

ResidualReport run_residualcheck(int points_per_case = 1000, uint64_t seed = 2024);
std::string format_report(const ResidualReport& r);

} // namespace wavepinn
