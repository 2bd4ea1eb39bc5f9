#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wavepinn/deriv.hpp"
#include "wavepinn/geometry.hpp"
#include "wavepinn/normalize.hpp"
#include "wavepinn/problems.hpp"

namespace wavepinn {

struct LossWeights {
    double w_pde = 1;
    double w_bc = 1;
    double w_ic_value = 1;
    double w_ic_velocity = 1;
    double w_data = 1;

    void validate() const;
    bool operator==(const LossWeights&) const = default;
};

struct LossBreakdown {
    double pde = 0;
    double bc = 0;
    double ic_value = 0;
    double ic_velocity = 0;
    double data = 0;
    double total = 0;
};

/// Labeled interior observations for the optional data-misfit term.
struct DataSet {
    std::vector<SpaceTimePoint> points;
    std::vector<double> values;
};

/// Mean-squared residual components over the batch; when grad is non-null the
/// gradient of the weighted total with respect to the parameters is
/// accumulated into it (grad is not zeroed here).
LossBreakdown assemble_loss(const FfmNetwork& net, deriv::Engine& engine,
                            const NormalizationPlan& plan, const WaveProblem& problem,
                            const TrainingBatch& batch, const LossWeights& weights,
                            const DataSet* data = nullptr, std::span<double> grad = {});

} // namespace wavepinn
