// Acceptance suite: each criterion prints one [PASS]/[FAIL] line; the process
// exit code is the number of failed criteria. Run with no arguments for the
// full suite or with criterion numbers (e.g. "acceptance 1 3") for a subset.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wavepinn/deriv.hpp"
#include "wavepinn/loss.hpp"
#include "wavepinn/problems.hpp"
#include "wavepinn/report.hpp"
#include "wavepinn/runconfig.hpp"
#include "wavepinn/train.hpp"
#include "wavepinn/verify.hpp"
#include "test_util.hpp"

using namespace wavepinn;
namespace fs = std::filesystem;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

bool report(int id, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << detail << std::endl;
    return ok;
}

// 1. Derivative engine vs finite differences: 20 seeds, Q in {1,3,10}, both
//    first-layer modes; bundles to 1e-5, parameter gradients to 1e-4.
bool criterion1() {
    Timer timer;
    const GradCheckReport r = run_gradcheck(20, {1, 3, 10}, 4);
    double wb = 0, wp = 0;
    for (const auto& row : r.rows) {
        wb = std::max(wb, row.max_rel_bundle);
        wp = std::max(wp, row.max_rel_param);
    }
    const double t = timer.seconds();
    std::ostringstream os;
    os << "derivative FD suite: worst bundle " << wb << " (tol 1e-5), worst param " << wp
       << " (tol 1e-4), " << r.rows.size() << " configs, " << t << "s (budget 120s)";
    return report(1, r.passed && t <= 120.0, os.str());
}

// 2. Exact-solution residuals vanish to 1e-9 for all problems and modes.
bool criterion2() {
    Timer timer;
    const ResidualReport r = run_residualcheck(1000, 2024);
    double worst = 0;
    for (const auto& row : r.rows)
        worst = std::max({worst, row.max_pde, row.max_bc, row.max_ic_value, row.max_ic_velocity});
    const double t = timer.seconds();
    std::ostringstream os;
    os << "exact-solution residual suite: worst residual " << worst << " (tol 1e-9), "
       << r.rows.size() << " problem/mode cases, " << t << "s (budget 60s)";
    return report(2, r.passed && t <= 60.0, os.str());
}

// 3. Chain-rule equivalence: mode-None residual equals the normalized-mode
//    residual of the map-composed function, 100 random smooth functions.
bool criterion3() {
    Timer timer;
    const WaveProblem pr = get_problem("example1_large");
    const NormalizationPlan none = NormalizationPlan::make(NormMode::None, pr.domain, pr.time);
    Rng rng(314159);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const test::SmoothTestFn fn = test::SmoothTestFn::random(3, rng);
        const test::MappedTestFn plain(fn, none);
        for (NormMode m : {NormMode::Spatial, NormMode::Temporal, NormMode::SpatioTemporal}) {
            const NormalizationPlan plan = NormalizationPlan::make(m, pr.domain, pr.time);
            const test::MappedTestFn mapped(fn, plan);
            for (int it = 0; it < 4; ++it) {
                const SpaceTimePoint p = test::random_interior_point(pr, rng);
                const double r0 = pde_residual(pr, plain, none, p);
                const double rm = pde_residual(pr, mapped, plan, p);
                worst = std::max(worst, std::abs(r0 - rm) / std::max(1.0, std::abs(r0)));
            }
        }
    }
    std::ostringstream os;
    os << "normalization chain-rule equivalence: worst relative gap " << worst
       << " (tol 1e-9), 100 functions x 3 modes, " << timer.seconds() << "s";
    return report(3, worst <= 1e-9, os.str());
}

double train_rel(const std::string& problem_name, NormMode mode, int epochs, uint64_t seed,
                 double* out_seconds = nullptr) {
    const WaveProblem problem = get_problem(problem_name);
    const NormalizationPlan plan = NormalizationPlan::make(mode, problem.domain, problem.time);
    NetworkConfig netcfg;
    netcfg.input_dim = problem.dim + 1;
    netcfg.subnet_count = 10;
    netcfg.init_seed = seed;
    TrainConfig traincfg;
    traincfg.epochs = epochs;
    traincfg.seed = seed;
    const TestSet rel_set = build_test_set(problem, problem.default_eval);

    Timer timer;
    Trainer trainer(problem, plan, init_network(netcfg), traincfg, LossWeights{});
    TrainHistory history;
    trainer.run(&rel_set, history);
    if (out_seconds) *out_seconds = timer.seconds();
    return evaluate_rel(trainer.net(), plan, problem, rel_set);
}

// 4. Small-domain training smoke: 5000 epochs reach REL <= 0.05 on the
//    128x128 grid at t = 0.5.
bool criterion4() {
    double seconds = 0;
    const double rel = train_rel("example1_small", NormMode::None, 5000, 1, &seconds);
    std::ostringstream os;
    os << "small-domain training: REL " << rel << " (tol 0.05) after 5000 epochs, " << seconds
       << "s (target 1800s on a desktop CPU)";
    return report(4, rel <= 0.05, os.str());
}

// 5. Large-domain ordering: spatial normalization beats no normalization at
//    identical seeds, and reaches REL <= 0.05 after 10000 epochs.
bool criterion5() {
    double s_none = 0, s_spatial = 0;
    const double rel_none = train_rel("example1_large", NormMode::None, 10000, 1, &s_none);
    const double rel_spatial = train_rel("example1_large", NormMode::Spatial, 10000, 1, &s_spatial);
    std::ostringstream os;
    os << "large-domain ordering: spatial REL " << rel_spatial << " vs none REL " << rel_none
       << " (require spatial < none and spatial <= 0.05), " << s_none + s_spatial << "s";
    return report(5, rel_spatial < rel_none && rel_spatial <= 0.05, os.str());
}

// 6. Metric and unit properties hold exactly.
bool criterion6() {
    bool ok = true;
    std::string why;

    const std::vector<double> u = {1.0, -2.0, 3.0, 0.5};
    std::vector<double> twice = u;
    for (double& v : twice) v *= 2.0;
    const std::vector<double> zero(u.size(), 0.0);
    if (rel_error(u, u) != 0.0) { ok = false; why += " rel(u,u)!=0;"; }
    if (rel_error(twice, u) != 1.0) { ok = false; why += " rel(2u,u)!=1;"; }
    if (rel_error(zero, u) != 1.0) { ok = false; why += " rel(0,u)!=1;"; }

    TrainConfig t;
    if (lr_at(t, 0) != 0.01) { ok = false; why += " lr(0)!=0.01;"; }
    if (lr_at(t, 100) != 0.00965) { ok = false; why += " lr(100)!=0.00965;"; }

    Rng rng(8);
    const int n = 200, d = 3;
    const std::vector<double> s = lhs_sample(n, d, rng);
    for (int j = 0; j < d; ++j) {
        std::vector<int> hist(n, 0);
        for (int i = 0; i < n; ++i) ++hist[static_cast<int>(s[static_cast<size_t>(i) * d + j] * n)];
        for (int h : hist)
            if (h != 1) { ok = false; why += " lhs-histogram;"; break; }
    }

    OptimizerState state(3);
    std::vector<double> params = {1.0, -2.0, 0.5};
    adam_step(state, params, std::vector<double>(3, 0.0), 0.01, 0.9, 0.999, 1e-8);
    if (params != std::vector<double>{1.0, -2.0, 0.5}) { ok = false; why += " adam-fixpoint;"; }

    return report(6, ok, ok ? "metric/unit identities hold exactly (REL, lr schedule, "
                              "LHS histogram, Adam zero-gradient fixpoint)"
                            : "failed:" + why);
}

// 7. Two seeded `compare` runs produce byte-identical output files.
bool criterion7() {
    Timer timer;
    const char* cli_env = std::getenv("WAVEPINN_CLI");
    const std::string cli = cli_env ? cli_env : "./tools/wavepinn";
    if (!fs::exists(cli))
        return report(7, false, "CLI binary not found at " + cli + " (set WAVEPINN_CLI)");

    const fs::path base = fs::temp_directory_path() / "wavepinn_acceptance_c7";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::vector<std::string> files = {
        "effective_config.txt", "rel_curve.csv",           "summary.txt",
        "loss_curve_none.csv",  "loss_curve_spatial.csv",  "loss_curve_temporal.csv",
        "loss_curve_spatiotemporal.csv"};

    const std::string abs_cli = fs::absolute(cli).string();
    for (int run = 0; run < 2; ++run) {
        const std::string dir = (base / ("run" + std::to_string(run))).string();
        fs::create_directories(dir);
        // run from inside the directory so the echoed config is identical too
        const std::string cmd = "cd " + dir + " && " + abs_cli +
                                " compare problem=example1_small epochs=500 test_interval=100"
                                " seed=7 init_seed=7 verbose=false eval_resolution=64"
                                " out_dir=out > compare.log 2>&1";
        if (std::system(cmd.c_str()) != 0)
            return report(7, false, "compare run " + std::to_string(run) + " failed, see " + dir + "/compare.log");
    }
    for (const std::string& f : files) {
        const std::string a = (base / "run0" / "out" / f).string();
        const std::string b = (base / "run1" / "out" / f).string();
        if (!fs::exists(a) || !fs::exists(b))
            return report(7, false, "missing output file " + f);
        if (test::slurp(a) != test::slurp(b))
            return report(7, false, "output file differs between runs: " + f);
    }
    std::ostringstream os;
    os << "determinism: two seeded compare runs (4 modes x 500 epochs) produced byte-identical "
       << files.size() << " files, " << timer.seconds() << "s";
    return report(7, true, os.str());
}

// Optional full-length study (disabled by default; ~6x the cost of criterion 5):
// spatial normalization at 30000 epochs is expected to land near REL 1e-3
// within half an order of magnitude.
bool criterion_long() {
    double seconds = 0;
    const double rel = train_rel("example1_large", NormMode::Spatial, 30000, 1, &seconds);
    std::ostringstream os;
    os << "full-length spatial run: REL " << rel << " after 30000 epochs (expected about 1e-3, "
       << "accept <= 3.2e-3), " << seconds << "s";
    return report(100, rel <= 3.2e-3, os.str());
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "long") == 0) {
            selected.push_back(100);
        } else {
            selected.push_back(std::atoi(argv[i]));
        }
    }
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7};

    int failures = 0;
    for (int id : selected) {
        bool ok = false;
        switch (id) {
            case 1: ok = criterion1(); break;
            case 2: ok = criterion2(); break;
            case 3: ok = criterion3(); break;
            case 4: ok = criterion4(); break;
            case 5: ok = criterion5(); break;
            case 6: ok = criterion6(); break;
            case 7: ok = criterion7(); break;
            case 100: ok = criterion_long(); break;
            default:
                std::cout << "[FAIL] criterion " << id << ": unknown criterion id" << std::endl;
        }
        if (!ok) ++failures;
    }
    return failures;
}
