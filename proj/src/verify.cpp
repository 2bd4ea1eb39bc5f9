#include "wavepinn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wavepinn/deriv.hpp"
#include "wavepinn/loss.hpp"
#include "wavepinn/rng.hpp"

namespace wavepinn {

namespace {

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

void jitter_params(FfmNetwork& net, Rng& rng) {
    for (double& p : net.params) p += 0.1 * (rng.uniform01() - 0.5);
}

double bundle_fd_max_rel(const FfmNetwork& net, Rng& rng, int n_points) {
    const int D = net.config.input_dim;
    const double h = 1e-4;
    deriv::Engine engine(net);
    double worst = 0;
    std::vector<double> z(D), zp(D), zm(D);
    for (int it = 0; it < n_points; ++it) {
        for (int k = 0; k < D; ++k) z[k] = rng.uniform01();
        const deriv::DerivativeBundle b = engine.value_grad_laplacian(z);
        const double f0 = net.forward(z);
        worst = std::max(worst, rel_diff(b.value, f0));
        for (int k = 0; k < D; ++k) {
            zp = z;
            zm = z;
            zp[k] += h;
            zm[k] -= h;
            const double fp = net.forward(zp);
            const double fm = net.forward(zm);
            worst = std::max(worst, rel_diff(b.grad[k], (fp - fm) / (2 * h)));
            worst = std::max(worst, rel_diff(b.diag2[k], (fp - 2 * f0 + fm) / (h * h)));
        }
    }
    return worst;
}

double param_fd_max_rel(FfmNetwork& net, const WaveProblem& problem,
                        const NormalizationPlan& plan, Rng& rng, int params_per_layer) {
    deriv::Engine engine(net);
    const LossWeights weights;
    BatchCounts counts{8, 4, 4};
    const TrainingBatch batch = sample_training_batch(problem, counts, rng);

    std::vector<double> grad(net.param_count(), 0.0);
    assemble_loss(net, engine, plan, problem, batch, weights, nullptr, grad);

    // spot-check indices: first/last weight and a bias of every layer in every
    // subnet, plus random extras
    std::vector<size_t> indices;
    for (int q = 0; q < net.config.subnet_count; ++q) {
        const size_t base = static_cast<size_t>(q) * net.layout.per_subnet;
        for (const ParamLayout::Layer& l : net.layout.layers) {
            indices.push_back(base + l.w_offset);
            indices.push_back(base + l.w_offset + static_cast<size_t>(l.in) * l.out - 1);
            if (l.has_bias) indices.push_back(base + l.b_offset);
            for (int r = 0; r < params_per_layer; ++r)
                indices.push_back(base + l.w_offset +
                                  rng.below(static_cast<uint64_t>(l.in) * l.out));
        }
    }
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());

    double worst = 0;
    for (size_t j : indices) {
        const double theta = net.params[j];
        const double h = 1e-5 * std::max(1.0, std::abs(theta));
        net.params[j] = theta + h;
        const double lp =
            assemble_loss(net, engine, plan, problem, batch, weights, nullptr, {}).total;
        net.params[j] = theta - h;
        const double lm =
            assemble_loss(net, engine, plan, problem, batch, weights, nullptr, {}).total;
        net.params[j] = theta;
        worst = std::max(worst, rel_diff(grad[j], (lp - lm) / (2 * h)));
    }
    return worst;
}

} // namespace

GradCheckReport run_gradcheck(int n_seeds, const std::vector<int>& subnet_counts,
                              int params_per_layer) {
    GradCheckReport report;
    const WaveProblem problem = get_problem("example1_small");
    double overall = 0;
    for (int s = 0; s < n_seeds; ++s) {
        for (int q : subnet_counts) {
            for (int fl = 0; fl < 2; ++fl) {
                NetworkConfig config;
                config.input_dim = 3;
                config.subnet_count = q;
                config.first_layer = fl ? NetworkConfig::FirstLayer::Plain
                                        : NetworkConfig::FirstLayer::Fourier;
                config.init_seed = 1000 + static_cast<uint64_t>(s) * 7 + q;
                FfmNetwork net = init_network(config);
                Rng rng(config.init_seed ^ 0x9e3779b97f4a7c15ull);
                jitter_params(net, rng);

                GradCheckReport::Row row;
                row.seed = config.init_seed;
                row.subnets = q;
                row.fourier = (fl == 0);
                row.max_rel_bundle = bundle_fd_max_rel(net, rng, 3);
                const NormalizationPlan plan = NormalizationPlan::make(
                    (s % 2) ? NormMode::Spatial : NormMode::None, problem.domain, problem.time);
                row.max_rel_param =
                    param_fd_max_rel(net, problem, plan, rng, params_per_layer);
                report.rows.push_back(row);
                overall = std::max({overall, row.max_rel_bundle, row.max_rel_param});
            }
        }
    }
    report.passed = true;
    for (const auto& row : report.rows)
        if (row.max_rel_bundle > report.tol_bundle || row.max_rel_param > report.tol_param)
            report.passed = false;
    return report;
}

std::string format_report(const GradCheckReport& r) {
    std::ostringstream os;
    double wb = 0, wp = 0;
    for (const auto& row : r.rows) {
        wb = std::max(wb, row.max_rel_bundle);
        wp = std::max(wp, row.max_rel_param);
    }
    os << "gradcheck: " << r.rows.size() << " configurations\n";
    os << "  worst bundle FD mismatch:    " << wb << " (tolerance " << r.tol_bundle << ")\n";
    os << "  worst parameter FD mismatch: " << wp << " (tolerance " << r.tol_param << ")\n";
    os << "  result: " << (r.passed ? "PASS" : "FAIL") << '\n';
    return os.str();
}

ResidualReport run_residualcheck(int points_per_case, uint64_t seed) {
    ResidualReport report;
    const NormMode modes[] = {NormMode::None, NormMode::Spatial, NormMode::Temporal,
                              NormMode::SpatioTemporal};
    for (const std::string& name : problem_names()) {
        const WaveProblem problem = get_problem(name);
        if (!problem.has_exact_derivatives()) continue;
        for (NormMode mode : modes) {
            const NormalizationPlan plan =
                NormalizationPlan::make(mode, problem.domain, problem.time);
            const NormalizedOracle oracle(problem, plan);
            Rng rng(seed ^ std::hash<std::string>{}(name));
            BatchCounts counts{points_per_case, points_per_case, points_per_case};
            const TrainingBatch batch = sample_training_batch(problem, counts, rng);

            ResidualReport::Row row;
            row.problem = name;
            row.mode = mode;
            for (const SpaceTimePoint& p : batch.interior)
                row.max_pde = std::max(row.max_pde,
                                       std::abs(pde_residual(problem, oracle, plan, p)));
            for (const BoundaryPoint& bp : batch.boundary)
                row.max_bc = std::max(row.max_bc,
                                      std::abs(boundary_residual(problem, oracle, plan, bp)));
            for (const SpaceTimePoint& p : batch.initial) {
                const auto [rv, rp] = initial_residuals(
                    problem, oracle, plan, std::span<const double>(p.x.data(), problem.dim));
                row.max_ic_value = std::max(row.max_ic_value, std::abs(rv));
                row.max_ic_velocity = std::max(row.max_ic_velocity, std::abs(rp));
            }
            report.rows.push_back(row);
        }
    }
    report.passed = true;
    for (const auto& row : report.rows)
        if (row.max_pde > report.tolerance || row.max_bc > report.tolerance ||
            row.max_ic_value > report.tolerance || row.max_ic_velocity > report.tolerance)
            report.passed = false;
    return report;
}

std::string format_report(const ResidualReport& r) {
    std::ostringstream os;
    os << "residualcheck: exact-solution residuals (tolerance " << r.tolerance << ")\n";
    for (const auto& row : r.rows) {
        os << "  " << row.problem << " [" << to_string(row.mode) << "] pde=" << row.max_pde
           << " bc=" << row.max_bc << " ic_value=" << row.max_ic_value
           << " ic_velocity=" << row.max_ic_velocity << '\n';
    }
    os << "  result: " << (r.passed ? "PASS" : "FAIL") << '\n';
    return os.str();
}

} // namespace wavepinn
