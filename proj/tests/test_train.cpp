#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "wavepinn/error.hpp"
#include "wavepinn/train.hpp"
#include "test_util.hpp"

using namespace wavepinn;

namespace {

NetworkConfig small_net(uint64_t seed) {
    NetworkConfig c;
    c.input_dim = 3;
    c.subnet_count = 2;
    c.hidden_widths = {8, 8};
    c.init_seed = seed;
    return c;
}

TrainConfig quick_train(int epochs, uint64_t seed) {
    TrainConfig t;
    t.epochs = epochs;
    t.counts = {32, 8, 16};
    t.test_interval = 50;
    t.seed = seed;
    return t;
}

} // namespace

TEST_CASE("learning rate schedule") {
    TrainConfig t;
    CHECK(lr_at(t, 0) == 0.01);
    CHECK(lr_at(t, 99) == 0.01);
    CHECK(lr_at(t, 100) == 0.00965);
    CHECK(lr_at(t, 199) == 0.00965);
    CHECK(test::rel_diff(lr_at(t, 30000), 2.2813609482717582e-07) <= 1e-12);

    TrainConfig c = t;
    c.continuous_decay = true;
    CHECK(c.continuous_decay);
    CHECK(lr_at(c, 50) == doctest::Approx(0.01 * std::pow(0.965, 0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(lr_at(t, -1), Error);
}

TEST_CASE("adam zero-gradient fixpoint and one-step magnitude") {
    OptimizerState state(3);
    std::vector<double> params = {1.0, -2.0, 0.5};
    const std::vector<double> zero(3, 0.0);
    adam_step(state, params, zero, 0.01, 0.9, 0.999, 1e-8);
    CHECK(params == std::vector<double>{1.0, -2.0, 0.5});

    OptimizerState s2(1);
    std::vector<double> p2 = {0.7};
    const std::vector<double> g2 = {0.35};
    adam_step(s2, p2, g2, 0.01, 0.9, 0.999, 1e-8);
    CHECK(std::abs((0.7 - p2[0]) - 0.01) <= 1e-7); // ~ lr * sign(g)
    CHECK(s2.step == 1);

    OptimizerState s3(1);
    std::vector<double> p3 = {1.0};
    const std::vector<double> bad = {std::nan("")};
    CHECK_THROWS_AS(adam_step(s3, p3, bad, 0.01, 0.9, 0.999, 1e-8), Error);
    CHECK(p3[0] == 1.0);
    CHECK(s3.step == 0);
    CHECK(s3.m[0] == 0.0);
}

TEST_CASE("adam trajectories are deterministic") {
    auto run = [] {
        OptimizerState state(4);
        std::vector<double> params = {0.1, 0.2, 0.3, 0.4};
        Rng rng(77);
        for (int i = 0; i < 200; ++i) {
            std::vector<double> g(4);
            for (double& v : g) v = rng.uniform(-1, 1);
            adam_step(state, params, g, 1e-3, 0.9, 0.999, 1e-8);
        }
        return params;
    };
    CHECK(run() == run());
}

TEST_CASE("relative error metric") {
    const std::vector<double> u = {1.0, -2.0, 3.0, 0.5};
    CHECK(rel_error(u, u) == 0.0);

    std::vector<double> twice = u;
    for (double& v : twice) v *= 2.0;
    CHECK(rel_error(twice, u) == 1.0);

    const std::vector<double> zero(u.size(), 0.0);
    CHECK(rel_error(zero, u) == 1.0);
    CHECK_THROWS_AS(rel_error(u, zero), Error);

    // permutation invariance
    std::vector<double> up = {3.0, 1.0, 0.5, -2.0};
    std::vector<double> predp = {6.0, 2.0, 1.0, -4.0};
    CHECK(rel_error(predp, up) == 1.0);

    // joint scaling invariance (exact for powers of two, close otherwise)
    std::vector<double> pred = {1.1, -1.9, 3.2, 0.4};
    std::vector<double> pred2 = pred, u2 = u;
    for (double& v : pred2) v *= 2.0;
    for (double& v : u2) v *= 2.0;
    CHECK(rel_error(pred2, u2) == rel_error(pred, u));
    std::vector<double> pred17 = pred, u17 = u;
    for (double& v : pred17) v *= 1.7;
    for (double& v : u17) v *= 1.7;
    CHECK(test::rel_diff(rel_error(pred17, u17), rel_error(pred, u)) <= 1e-12);
}

TEST_CASE("single small-step updates rarely increase the same-batch loss") {
    const WaveProblem problem = get_problem("example1_small");
    const NormalizationPlan plan =
        NormalizationPlan::make(NormMode::None, problem.domain, problem.time);
    int violations = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        FfmNetwork net = init_network(small_net(400 + trial));
        deriv::Engine engine(net);
        Rng rng(900 + trial);
        const TrainingBatch batch = sample_training_batch(problem, {16, 8, 8}, rng);
        std::vector<double> grad(net.param_count(), 0.0);
        const double before =
            assemble_loss(net, engine, plan, problem, batch, LossWeights{}, nullptr, grad).total;
        OptimizerState state(net.param_count());
        adam_step(state, net.params, grad, 1e-6, 0.9, 0.999, 1e-8);
        const double after =
            assemble_loss(net, engine, plan, problem, batch, LossWeights{}).total;
        if (after > before) ++violations;
    }
    CHECK(violations <= 2); // statistical: about 5% slack for momentum effects
}

TEST_CASE("trainer records rel at the test interval and is seed-deterministic") {
    const WaveProblem problem = get_problem("example1_small");
    const NormalizationPlan plan =
        NormalizationPlan::make(NormMode::Spatial, problem.domain, problem.time);
    EvalSpec eval = problem.default_eval;
    eval.resolution = 16;
    const TestSet rel_set = build_test_set(problem, eval);

    auto run = [&] {
        Trainer trainer(problem, plan, init_network(small_net(7)), quick_train(200, 3),
                        LossWeights{});
        TrainHistory history;
        trainer.run(&rel_set, history);
        return std::pair{trainer.net().params, history};
    };
    const auto [params1, hist1] = run();
    const auto [params2, hist2] = run();

    CHECK(hist1.epochs.size() == 200);
    REQUIRE(hist1.rel.size() == 4);
    for (size_t i = 0; i < hist1.rel.size(); ++i)
        CHECK(hist1.rel[i].first == static_cast<int>(50 * (i + 1)));
    CHECK(params1 == params2);
    REQUIRE(hist1.epochs.size() == hist2.epochs.size());
    for (size_t e = 0; e < hist1.epochs.size(); ++e)
        CHECK(hist1.epochs[e].total == hist2.epochs[e].total);
    for (size_t i = 0; i < hist1.rel.size(); ++i)
        CHECK(hist1.rel[i].second == hist2.rel[i].second);
}

TEST_CASE("checkpoint resume reproduces the uninterrupted run bit-for-bit") {
    namespace fs = std::filesystem;
    const WaveProblem problem = get_problem("example1_small");
    const NormalizationPlan plan =
        NormalizationPlan::make(NormMode::None, problem.domain, problem.time);
    const std::string dir = (fs::temp_directory_path() / "wp_resume_test").string();
    fs::create_directories(dir);

    // uninterrupted: 120 epochs
    Trainer full(problem, plan, init_network(small_net(11)), quick_train(120, 5), LossWeights{});
    TrainHistory hist_full;
    full.run(nullptr, hist_full);

    // interrupted at 60, resumed from the saved state
    TrainConfig first_half = quick_train(60, 5);
    Trainer half(problem, plan, init_network(small_net(11)), first_half, LossWeights{});
    TrainHistory hist_a;
    half.run(nullptr, hist_a);
    half.save_state(dir + "/state.txt");

    Trainer resumed(problem, plan, init_network(small_net(11)), quick_train(120, 5),
                    LossWeights{});
    resumed.load_state(dir + "/state.txt");
    CHECK(resumed.epoch() == 60);
    TrainHistory hist_b;
    resumed.run(nullptr, hist_b);

    CHECK(resumed.net().params == full.net().params);
    REQUIRE(hist_a.epochs.size() + hist_b.epochs.size() == hist_full.epochs.size());
    for (size_t e = 0; e < hist_b.epochs.size(); ++e)
        CHECK(hist_b.epochs[e].total == hist_full.epochs[60 + e].total);
    fs::remove_all(dir);
}

TEST_CASE("reduced-network training decreases the relative error") {
    const WaveProblem problem = get_problem("example1_small");
    const NormalizationPlan plan =
        NormalizationPlan::make(NormMode::None, problem.domain, problem.time);

    NetworkConfig netcfg;
    netcfg.input_dim = 3;
    netcfg.subnet_count = 5;
    netcfg.hidden_widths = {16, 16};
    netcfg.init_seed = 2025;

    TrainConfig traincfg;
    traincfg.epochs = 3000;
    traincfg.counts = {1500, 300, 700};
    traincfg.test_interval = 1000;
    traincfg.seed = 9;

    EvalSpec eval = problem.default_eval;
    eval.resolution = 64;
    const TestSet rel_set = build_test_set(problem, eval);

    FfmNetwork net = init_network(netcfg);
    const double initial = evaluate_rel(net, plan, problem, rel_set);
    Trainer trainer(problem, plan, std::move(net), traincfg, LossWeights{});
    TrainHistory history;
    trainer.run(&rel_set, history);
    const double final_rel = evaluate_rel(trainer.net(), plan, problem, rel_set);

    CAPTURE(initial);
    CAPTURE(final_rel);
    CHECK(final_rel < initial);
    REQUIRE(history.rel.size() == 3);
    CHECK(history.rel.back().second == final_rel);
}
