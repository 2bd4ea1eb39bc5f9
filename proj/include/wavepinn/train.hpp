#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wavepinn/loss.hpp"
#include "wavepinn/network.hpp"
#include "wavepinn/normalize.hpp"
#include "wavepinn/problems.hpp"

namespace wavepinn {

struct TrainConfig {
    int epochs = 30000;
    BatchCounts counts;
    int test_interval = 1000;
    double lr0 = 0.01;
    double decay_rate = 0.035;
    int decay_interval = 100;
    bool continuous_decay = false; // real-exponent variant of the staircase schedule
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    uint64_t seed = 0;
    int checkpoint_interval = 0; // 0: final checkpoint only

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// lr0 * (1 - decay_rate)^floor(epoch / decay_interval).
double lr_at(const TrainConfig& config, int epoch);

struct OptimizerState {
    std::vector<double> m;
    std::vector<double> v;
    int step = 0;

    explicit OptimizerState(size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One Adam update with bias correction; state is untouched if the gradient
/// contains non-finite entries (Numeric error).
void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grad,
               double lr, double beta1, double beta2, double epsilon);

struct TrainHistory {
    std::vector<LossBreakdown> epochs;               // one entry per epoch
    std::vector<std::pair<int, double>> rel;         // (epoch, REL) at test_interval multiples
    std::vector<std::pair<int, double>> wall_ms;     // (epoch, elapsed ms) every 1000 epochs
};

/// sqrt(sum (pred-u)^2 / sum u^2); DegenerateReference error when sum u^2 = 0.
double rel_error(std::span<const double> pred, std::span<const double> exact);
double evaluate_rel(const FfmNetwork& net, const NormalizationPlan& plan,
                    const WaveProblem& problem, const TestSet& test);

/// Resample / assemble loss / Adam step loop with periodic REL evaluation and
/// optional state checkpoints. Deterministic for a fixed seed.
class Trainer {
public:
    Trainer(const WaveProblem& problem, const NormalizationPlan& plan, FfmNetwork net,
            const TrainConfig& config, const LossWeights& weights);
    Trainer(const Trainer&) = delete;
    Trainer& operator=(const Trainer&) = delete;

    /// Runs up to config.epochs (resume-aware); rel_set may be null to skip
    /// REL tracking. checkpoint_dir empty: no files written.
    void run(const TestSet* rel_set, TrainHistory& history,
             const std::string& checkpoint_dir = "", bool verbose = false);

    const FfmNetwork& net() const { return net_; }
    int epoch() const { return epoch_; }

    void save_state(const std::string& path) const;
    /// Restores parameters, optimizer moments, and the sampling RNG stream so
    /// the continued run matches an uninterrupted one bit-for-bit.
    void load_state(const std::string& path);

private:
    const WaveProblem* problem_;
    NormalizationPlan plan_;
    FfmNetwork net_;
    TrainConfig config_;
    LossWeights weights_;
    deriv::Engine engine_;
    OptimizerState opt_;
    Rng rng_;
    int epoch_ = 0;
};

} // namespace wavepinn
