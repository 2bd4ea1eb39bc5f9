#include "wavepinn/train.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "wavepinn/error.hpp"

namespace wavepinn {

void TrainConfig::validate() const {
    if (epochs < 1) throw Error(ErrorCategory::Config, "epochs must be >= 1");
    if (!(lr0 > 0)) throw Error(ErrorCategory::Config, "lr0 must be positive");
    if (!(decay_rate >= 0 && decay_rate < 1))
        throw Error(ErrorCategory::Config, "decay_rate must lie in [0, 1)");
    if (decay_interval < 1) throw Error(ErrorCategory::Config, "decay_interval must be >= 1");
    if (test_interval < 1) throw Error(ErrorCategory::Config, "test_interval must be >= 1");
}

double lr_at(const TrainConfig& config, int epoch) {
    if (epoch < 0) throw Error(ErrorCategory::InvalidArgument, "epoch must be >= 0");
    const double k = config.continuous_decay
                         ? static_cast<double>(epoch) / config.decay_interval
                         : static_cast<double>(epoch / config.decay_interval);
    return config.lr0 * std::pow(1.0 - config.decay_rate, k);
}

void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grad,
               double lr, double beta1, double beta2, double epsilon) {
    const size_t n = params.size();
    if (grad.size() != n || state.m.size() != n || state.v.size() != n)
        throw Error(ErrorCategory::Shape, "adam_step: length mismatch");
    for (double g : grad)
        if (!std::isfinite(g))
            throw Error(ErrorCategory::Numeric, "adam_step: non-finite gradient entry");

    const int t = state.step + 1;
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + epsilon);
    }
    state.step = t;
}

double rel_error(std::span<const double> pred, std::span<const double> exact) {
    if (pred.size() != exact.size() || pred.empty())
        throw Error(ErrorCategory::InvalidArgument, "rel_error: empty or mismatched inputs");
    double num = 0, den = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - exact[i];
        num += d * d;
        den += exact[i] * exact[i];
    }
    if (den == 0)
        throw Error(ErrorCategory::DegenerateReference, "rel_error: reference norm is zero");
    return std::sqrt(num / den);
}

double evaluate_rel(const FfmNetwork& net, const NormalizationPlan& plan,
                    const WaveProblem& problem, const TestSet& test) {
    if (test.points.empty())
        throw Error(ErrorCategory::InvalidArgument, "evaluate_rel: empty test set");
    if (test.exact.size() != test.points.size())
        throw Error(ErrorCategory::Unsupported, "evaluate_rel: test set has no exact values");
    deriv::Engine engine(net);
    const int D = problem.dim + 1;
    const int n = static_cast<int>(test.points.size());
    std::vector<double> pts(static_cast<size_t>(n) * D);
    for (int i = 0; i < n; ++i)
        plan.map_to_unit(test.points[i], std::span<double>(pts.data() + static_cast<size_t>(i) * D, D));
    std::vector<double> bundles(static_cast<size_t>(n) * deriv::bundle_width(D));
    engine.eval_bundles(pts, n, deriv::Mode::Value, bundles);
    std::vector<double> pred(n);
    for (int i = 0; i < n; ++i) pred[i] = bundles[static_cast<size_t>(i) * deriv::bundle_width(D)];
    return rel_error(pred, test.exact);
}

Trainer::Trainer(const WaveProblem& problem, const NormalizationPlan& plan, FfmNetwork net,
                 const TrainConfig& config, const LossWeights& weights)
    : problem_(&problem),
      plan_(plan),
      net_(std::move(net)),
      config_(config),
      weights_(weights),
      engine_(net_),
      opt_(net_.param_count()),
      rng_(config.seed) {
    config_.validate();
    weights_.validate();
    if (net_.config.input_dim != problem.dim + 1)
        throw Error(ErrorCategory::Config, "network input_dim must equal problem dim + 1");
}

void Trainer::run(const TestSet* rel_set, TrainHistory& history, const std::string& checkpoint_dir,
                  bool verbose) {
    namespace fs = std::filesystem;
    if (!checkpoint_dir.empty()) fs::create_directories(checkpoint_dir);

    std::vector<double> grad(net_.param_count());
    const auto t_start = std::chrono::steady_clock::now();

    for (; epoch_ < config_.epochs; ++epoch_) {
        const TrainingBatch batch = sample_training_batch(*problem_, config_.counts, rng_);
        std::fill(grad.begin(), grad.end(), 0.0);
        const LossBreakdown loss =
            assemble_loss(net_, engine_, plan_, *problem_, batch, weights_, nullptr, grad);
        adam_step(opt_, net_.params, grad, lr_at(config_, epoch_), config_.beta1, config_.beta2,
                  config_.epsilon);
        history.epochs.push_back(loss);

        const int done = epoch_ + 1;
        if (rel_set && done % config_.test_interval == 0) {
            const double rel = evaluate_rel(net_, plan_, *problem_, *rel_set);
            history.rel.emplace_back(done, rel);
            if (verbose)
                std::cout << "epoch " << done << "/" << config_.epochs
                          << " loss=" << loss.total << " rel=" << rel << std::endl;
        } else if (verbose && done % 1000 == 0) {
            std::cout << "epoch " << done << "/" << config_.epochs << " loss=" << loss.total
                      << std::endl;
        }
        if (done % 1000 == 0) {
            const auto now = std::chrono::steady_clock::now();
            history.wall_ms.emplace_back(
                done, std::chrono::duration<double, std::milli>(now - t_start).count());
        }
        if (!checkpoint_dir.empty() && config_.checkpoint_interval > 0 &&
            done % config_.checkpoint_interval == 0 && done < config_.epochs) {
            save_state(checkpoint_dir + "/checkpoint_epoch_" + std::to_string(done) + ".txt");
        }
    }
    if (!checkpoint_dir.empty()) save_state(checkpoint_dir + "/checkpoint_final.txt");
}

void Trainer::save_state(const std::string& path) const {
    Checkpoint ck;
    ck.net = net_;
    ck.epoch = epoch_;
    ck.train_seed = config_.seed;
    ck.problem = problem_->name;
    ck.normalization = to_string(plan_.mode);
    ck.has_train_state = true;
    ck.adam_step = opt_.step;
    ck.adam_m = opt_.m;
    ck.adam_v = opt_.v;
    std::ostringstream ss;
    ss << rng_;
    ck.rng_state = ss.str();
    save_checkpoint(ck, path);
}

void Trainer::load_state(const std::string& path) {
    Checkpoint ck = load_checkpoint(path);
    if (!ck.has_train_state)
        throw Error(ErrorCategory::File, "checkpoint has no training state: " + path);
    if (ck.net.param_count() != net_.param_count())
        throw Error(ErrorCategory::Config, "checkpoint does not match the configured network");
    net_ = std::move(ck.net);
    engine_.sync();
    opt_.m = std::move(ck.adam_m);
    opt_.v = std::move(ck.adam_v);
    opt_.step = ck.adam_step;
    epoch_ = ck.epoch;
    std::istringstream ss(ck.rng_state);
    ss >> rng_;
    if (!ss) throw Error(ErrorCategory::File, "bad rng state in checkpoint: " + path);
}

} // namespace wavepinn
