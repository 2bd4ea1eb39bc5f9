#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wavepinn/error.hpp"
#include "wavepinn/report.hpp"
#include "wavepinn/runconfig.hpp"
#include "wavepinn/verify.hpp"

namespace fs = std::filesystem;
using namespace wavepinn;

namespace {

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::InvalidArgument:
        case ErrorCategory::Config:
        case ErrorCategory::Shape: return 2;
        case ErrorCategory::File: return 3;
        case ErrorCategory::Numeric: return 4;
        case ErrorCategory::Geometry: return 5;
        case ErrorCategory::Lookup: return 6;
        case ErrorCategory::Unsupported: return 7;
        case ErrorCategory::DegenerateReference: return 8;
    }
    return 1;
}

void usage() {
    std::cout <<
        "usage: wavepinn <command> [--config FILE] [--checkpoint FILE] [key=value ...]\n"
        "\n"
        "commands:\n"
        "  train          train a network and write history/checkpoint files\n"
        "  eval           evaluate a checkpoint on the problem's test set\n"
        "  compare        train all four normalization modes with shared seeds\n"
        "  gradcheck      compare analytic derivatives against finite differences\n"
        "  residualcheck  verify built-in exact solutions against all residuals\n"
        "\n"
        "Config keys given as key=value override the config file; see README.\n";
}

struct Args {
    std::string command;
    std::string config_path;
    std::string checkpoint_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

Args parse_args(int argc, char** argv) {
    Args args;
    if (argc < 2) throw Error(ErrorCategory::InvalidArgument, "missing command");
    args.command = argv[1];
    if (args.command == "--help" || args.command == "-h") {
        usage();
        std::exit(0);
    }
    for (int i = 2; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            args.config_path = argv[++i];
        } else if (a == "--checkpoint" && i + 1 < argc) {
            args.checkpoint_path = argv[++i];
        } else if (a == "--help" || a == "-h") {
            usage();
            std::exit(0);
        } else {
            const size_t pos = a.find('=');
            if (pos == std::string::npos)
                throw Error(ErrorCategory::InvalidArgument, "unrecognized argument: " + a);
            args.overrides.emplace_back(a.substr(0, pos), a.substr(pos + 1));
        }
    }
    return args;
}

RunConfig load_config(const Args& args) {
    RunConfig config;
    if (!args.config_path.empty()) config = parse_config_file(args.config_path);
    for (const auto& [k, v] : args.overrides) apply_override(config, k, v);
    return config;
}

void write_effective_config(const RunConfig& config) {
    fs::create_directories(config.out_dir);
    std::ofstream os(config.out_dir + "/effective_config.txt", std::ios::binary);
    if (!os) throw Error(ErrorCategory::File, "cannot write " + config.out_dir + "/effective_config.txt");
    os << dump_config(config);
}

int cmd_train(const RunConfig& config) {
    const WaveProblem problem = config.make_problem();
    const NormalizationPlan plan = config.make_plan(problem);
    NetworkConfig netcfg = config.network;
    netcfg.input_dim = problem.dim + 1;
    FfmNetwork net = init_network(netcfg);

    TestSet rel_set;
    if (problem.has_exact_value()) rel_set = build_test_set(problem, config.eval_spec(problem));

    DataSet data;
    if (!config.data_file.empty()) data = load_data_file(config.data_file, problem.dim);

    write_effective_config(config);
    Trainer trainer(problem, plan, std::move(net), config.train, config.weights);
    TrainHistory history;
    trainer.run(rel_set.points.empty() ? nullptr : &rel_set, history, config.out_dir,
                config.verbose);

    write_loss_curve(config.out_dir + "/loss_curve.csv", history, config.train);
    write_rel_curve(config.out_dir + "/rel_curve.csv", history.rel);
    std::vector<std::string> lines;
    lines.push_back("problem " + problem.name);
    lines.push_back("normalization " + std::string(to_string(plan.mode)));
    lines.push_back("epochs " + std::to_string(config.train.epochs));
    if (!history.epochs.empty())
        lines.push_back("final_loss_total " + format_double(history.epochs.back().total));
    if (!history.rel.empty())
        lines.push_back("final_rel " + format_double(history.rel.back().second));
    write_summary(config.out_dir + "/summary.txt", lines);
    return 0;
}

int cmd_eval(const RunConfig& config, const std::string& checkpoint_path) {
    if (checkpoint_path.empty())
        throw Error(ErrorCategory::File, "eval requires --checkpoint");
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const WaveProblem problem = config.make_problem();
    if (ck.net.config.input_dim != problem.dim + 1)
        throw Error(ErrorCategory::Config, "checkpoint input_dim does not match the problem");
    const NormalizationPlan plan = config.make_plan(problem);
    if (!problem.has_exact_value())
        throw Error(ErrorCategory::Unsupported,
                    "eval needs a problem with an exact solution for the error grid");

    const TestSet test = build_test_set(problem, config.eval_spec(problem));
    deriv::Engine engine(ck.net);
    const int D = problem.dim + 1;
    const int W = deriv::bundle_width(D);
    std::vector<double> pts(test.points.size() * D);
    for (size_t i = 0; i < test.points.size(); ++i)
        plan.map_to_unit(test.points[i], std::span<double>(pts.data() + i * D, D));
    std::vector<double> bundles(test.points.size() * W);
    engine.eval_bundles(pts, static_cast<int>(test.points.size()), deriv::Mode::Value, bundles);
    std::vector<double> pred(test.points.size());
    for (size_t i = 0; i < pred.size(); ++i) pred[i] = bundles[i * W];

    fs::create_directories(config.out_dir);
    write_effective_config(config);
    write_error_grid(config.out_dir + "/error_grid.csv", test, pred);
    std::vector<std::string> lines;
    lines.push_back("problem " + problem.name);
    lines.push_back("checkpoint_epoch " + std::to_string(ck.epoch));
    lines.push_back("points " + std::to_string(test.points.size()));
    lines.push_back("rel " + format_double(rel_error(pred, test.exact)));
    write_summary(config.out_dir + "/summary.txt", lines);
    if (config.verbose)
        std::cout << "wrote " << config.out_dir << "/error_grid.csv (" << test.points.size()
                  << " rows)\n";
    return 0;
}

int cmd_compare(const RunConfig& config) {
    const WaveProblem problem = config.make_problem();
    NetworkConfig netcfg = config.network;
    netcfg.input_dim = problem.dim + 1;
    const FfmNetwork initial = init_network(netcfg); // shared across modes

    TestSet rel_set;
    if (problem.has_exact_value()) rel_set = build_test_set(problem, config.eval_spec(problem));

    write_effective_config(config);
    const NormMode modes[] = {NormMode::None, NormMode::Spatial, NormMode::Temporal,
                              NormMode::SpatioTemporal};
    std::vector<std::string> labels;
    std::vector<std::vector<std::pair<int, double>>> curves;
    std::vector<std::string> summary;
    for (NormMode mode : modes) {
        const NormalizationPlan plan = NormalizationPlan::make(mode, problem.domain, problem.time,
                                                               config.st_compat_time_factor);
        Trainer trainer(problem, plan, initial, config.train, config.weights);
        TrainHistory history;
        if (config.verbose) std::cout << "mode " << to_string(mode) << "...\n";
        trainer.run(rel_set.points.empty() ? nullptr : &rel_set, history, "", config.verbose);
        write_loss_curve(config.out_dir + "/loss_curve_" + to_string(mode) + ".csv", history,
                         config.train);
        labels.push_back(to_string(mode));
        curves.push_back(history.rel);
        const std::string final_rel =
            history.rel.empty() ? "nan" : format_double(history.rel.back().second);
        summary.push_back("final_rel_" + std::string(to_string(mode)) + " " + final_rel);
    }
    write_joined_rel_curve(config.out_dir + "/rel_curve.csv", labels, curves);
    write_summary(config.out_dir + "/summary.txt", summary);
    return 0;
}

int cmd_gradcheck(const RunConfig&) {
    const GradCheckReport report = run_gradcheck();
    std::cout << format_report(report);
    return report.passed ? 0 : 1;
}

int cmd_residualcheck(const RunConfig&) {
    const ResidualReport report = run_residualcheck();
    std::cout << format_report(report);
    return report.passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
#ifdef _OPENMP
        if (const char* env = std::getenv("WAVEPINN_THREADS")) {
            const int n = std::atoi(env);
            if (n > 0) omp_set_num_threads(n);
        }
#endif
        const Args args = parse_args(argc, argv);
        const RunConfig config = load_config(args);
        if (args.command == "train") return cmd_train(config);
        if (args.command == "eval") return cmd_eval(config, args.checkpoint_path);
        if (args.command == "compare") return cmd_compare(config);
        if (args.command == "gradcheck") return cmd_gradcheck(config);
        if (args.command == "residualcheck") return cmd_residualcheck(config);
        usage();
        throw Error(ErrorCategory::InvalidArgument, "unknown command: " + args.command);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.category) << "]: " << e.what() << '\n';
        return exit_code(e.category);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
