#pragma once

#include <map>
#include <string>
#include <vector>

#include "wavepinn/loss.hpp"
#include "wavepinn/network.hpp"
#include "wavepinn/normalize.hpp"
#include "wavepinn/problems.hpp"
#include "wavepinn/train.hpp"

namespace wavepinn {

/// Everything one run needs, parsed from a `key = value` config file plus
/// command-line overrides. Unknown keys are rejected by name.
struct RunConfig {
    std::string problem_name = "example1_small";
    NormMode normalization = NormMode::None;
    bool st_compat_time_factor = false;
    NetworkConfig network;
    TrainConfig train;
    LossWeights weights;
    std::string out_dir = "out";
    std::string data_file;
    bool verbose = true;

    /// Hole override: "cx:cy[:cz]:r, ..." or "none"; empty keeps the problem default.
    std::string holes;
    /// eval_* overrides applied on top of the problem's default evaluation set
    /// (keys stored without the eval_ prefix).
    std::map<std::string, std::string> eval;
    /// custom_* keys describing a declarative problem (used when problem = custom).
    std::map<std::string, std::string> custom;

    WaveProblem make_problem() const;
    NormalizationPlan make_plan(const WaveProblem& problem) const;
    EvalSpec eval_spec(const WaveProblem& problem) const;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

/// Effective-config dump; parsing it back yields an equal RunConfig.
std::string dump_config(const RunConfig& config);

/// CSV with header x1,x2[,x3],t,u describing labelled observations.
DataSet load_data_file(const std::string& path, int dim);

} // namespace wavepinn
