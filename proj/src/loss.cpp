#include "wavepinn/loss.hpp"

#include <atomic>
#include <cmath>

#include "wavepinn/error.hpp"

namespace wavepinn {

void LossWeights::validate() const {
    for (double w : {w_pde, w_bc, w_ic_value, w_ic_velocity, w_data})
        if (!(w >= 0) || !std::isfinite(w))
            throw Error(ErrorCategory::Config, "loss weights must be finite and >= 0");
}

namespace {

/// Records the first non-finite residual seen inside the (possibly parallel)
/// evaluation; reported as a Numeric error naming the term afterwards.
struct FiniteGuard {
    std::atomic<long> first{-1};
    const char* term = "";

    void note(const char* t, int i, double r) {
        if (std::isfinite(r)) return;
        long expected = -1;
        if (first.compare_exchange_strong(expected, i)) term = t;
    }
    void check() const {
        if (first.load() >= 0)
            throw Error(ErrorCategory::Numeric,
                        std::string("non-finite ") + term + " residual at batch index " +
                            std::to_string(first.load()));
    }
};

double mean_sq(std::span<const double> r) {
    double acc = 0;
    for (double v : r) acc += v * v;
    return acc / static_cast<double>(r.size());
}

void map_points(const NormalizationPlan& plan, std::span<const SpaceTimePoint> pts,
                std::vector<double>& out) {
    const int D = plan.dim + 1;
    out.resize(pts.size() * D);
    for (size_t i = 0; i < pts.size(); ++i)
        plan.map_to_unit(pts[i], std::span<double>(out.data() + i * D, D));
}

deriv::DerivativeBundle unpack(const double* row, int dim) {
    deriv::DerivativeBundle b;
    b.value = row[0];
    for (int k = 0; k <= dim; ++k) {
        b.grad[k] = row[1 + k];
        b.diag2[k] = row[1 + dim + 1 + k];
    }
    return b;
}

} // namespace

LossBreakdown assemble_loss(const FfmNetwork& net, deriv::Engine& engine,
                            const NormalizationPlan& plan, const WaveProblem& problem,
                            const TrainingBatch& batch, const LossWeights& weights,
                            const DataSet* data, std::span<double> grad) {
    weights.validate();
    if (batch.interior.empty())
        throw Error(ErrorCategory::InvalidArgument, "loss requires a nonempty interior batch");
    if (&engine.net() != &net)
        throw Error(ErrorCategory::Shape, "engine was built for a different network");
    engine.sync();

    const int d = problem.dim;
    const int D = d + 1;
    const int W = deriv::bundle_width(D);
    const bool with_grad = !grad.empty();
    LossBreakdown out;
    FiniteGuard guard;

    std::vector<double> pts;
    std::vector<double> bundles;
    std::vector<double> residuals;

    // Interior: second-order residual of the governing equation.
    {
        const int n = static_cast<int>(batch.interior.size());
        map_points(plan, batch.interior, pts);
        bundles.resize(static_cast<size_t>(n) * W);
        residuals.resize(n);
        const double scale = 2.0 * weights.w_pde / n;
        auto seed_fn = [&](int i, const double* brow, double* seed) {
            const deriv::DerivativeBundle b = unpack(brow, d);
            const SpaceTimePoint& p = batch.interior[i];
            const double r = pde_residual_from_bundle(problem, plan, p, b);
            guard.note("pde", i, r);
            residuals[i] = r;
            const double f = scale * r;
            seed[0] = -problem.forcing_du(p, b.value) * f;
            for (int a = 0; a < d; ++a) seed[1 + D + a] = -problem.a_sq * plan.coeff_space_second(a) * f;
            seed[1 + D + d] = plan.coeff_time_second() * f;
        };
        if (with_grad) {
            engine.eval_vjp(pts, n, deriv::Mode::Full, bundles, seed_fn, grad);
        } else {
            engine.eval_bundles(pts, n, deriv::Mode::Full, bundles);
            double dummy[2 * deriv::kMaxInput + 1];
            for (int i = 0; i < n; ++i) {
                std::fill(std::begin(dummy), std::end(dummy), 0.0);
                seed_fn(i, bundles.data() + static_cast<size_t>(i) * W, dummy);
            }
        }
        guard.check();
        out.pde = mean_sq(residuals);
    }

    // Boundary: value misfit (Dirichlet) or scaled normal derivative (Neumann).
    if (!batch.boundary.empty()) {
        const int n = static_cast<int>(batch.boundary.size());
        std::vector<SpaceTimePoint> bpts(n);
        for (int i = 0; i < n; ++i) bpts[i] = batch.boundary[i].point;
        map_points(plan, bpts, pts);
        bundles.resize(static_cast<size_t>(n) * W);
        residuals.resize(n);
        const bool dirichlet = problem.bc_kind == BoundaryKind::Dirichlet;
        const double scale = 2.0 * weights.w_bc / n;
        auto seed_fn = [&](int i, const double* brow, double* seed) {
            const deriv::DerivativeBundle b = unpack(brow, d);
            const BoundaryPoint& bp = batch.boundary[i];
            const double r = boundary_residual_from_bundle(problem, plan, bp, b);
            guard.note("boundary", i, r);
            residuals[i] = r;
            const double f = scale * r;
            if (dirichlet) {
                seed[0] = f;
            } else {
                for (int a = 0; a < d; ++a)
                    seed[1 + a] = plan.coeff_space_first(a) * bp.normal[a] * f;
            }
        };
        const deriv::Mode mode = dirichlet ? deriv::Mode::Value : deriv::Mode::FirstOrder;
        if (with_grad) {
            engine.eval_vjp(pts, n, mode, bundles, seed_fn, grad);
        } else {
            engine.eval_bundles(pts, n, mode, bundles);
            double dummy[2 * deriv::kMaxInput + 1];
            for (int i = 0; i < n; ++i) {
                std::fill(std::begin(dummy), std::end(dummy), 0.0);
                seed_fn(i, bundles.data() + static_cast<size_t>(i) * W, dummy);
            }
        }
        guard.check();
        out.bc = mean_sq(residuals);
    }

    // Initial: value and velocity misfits share one first-order evaluation.
    std::vector<double> residuals_v;
    if (!batch.initial.empty()) {
        const int n = static_cast<int>(batch.initial.size());
        map_points(plan, batch.initial, pts);
        bundles.resize(static_cast<size_t>(n) * W);
        residuals.resize(n);   // velocity
        residuals_v.resize(n); // value
        const double scale_v = 2.0 * weights.w_ic_value / n;
        const double scale_p = 2.0 * weights.w_ic_velocity / n;
        auto seed_fn = [&](int i, const double* brow, double* seed) {
            const deriv::DerivativeBundle b = unpack(brow, d);
            const SpaceTimePoint& p = batch.initial[i];
            const auto [rv, rp] = initial_residuals_from_bundle(
                problem, plan, std::span<const double>(p.x.data(), d), b);
            guard.note("initial-value", i, rv);
            guard.note("initial-velocity", i, rp);
            residuals_v[i] = rv;
            residuals[i] = rp;
            seed[0] = scale_v * rv;
            seed[1 + d] = plan.coeff_time_first() * scale_p * rp;
        };
        if (with_grad) {
            engine.eval_vjp(pts, n, deriv::Mode::FirstOrder, bundles, seed_fn, grad);
        } else {
            engine.eval_bundles(pts, n, deriv::Mode::FirstOrder, bundles);
            double dummy[2 * deriv::kMaxInput + 1];
            for (int i = 0; i < n; ++i) {
                std::fill(std::begin(dummy), std::end(dummy), 0.0);
                seed_fn(i, bundles.data() + static_cast<size_t>(i) * W, dummy);
            }
        }
        guard.check();
        out.ic_value = mean_sq(residuals_v);
        out.ic_velocity = mean_sq(residuals);
    }

    // Optional labelled observations.
    if (data && !data->points.empty()) {
        const int n = static_cast<int>(data->points.size());
        if (data->values.size() != data->points.size())
            throw Error(ErrorCategory::InvalidArgument, "data set points/values length mismatch");
        map_points(plan, data->points, pts);
        bundles.resize(static_cast<size_t>(n) * W);
        residuals.resize(n);
        const double scale = 2.0 * weights.w_data / n;
        auto seed_fn = [&](int i, const double* brow, double* seed) {
            const double r = brow[0] - data->values[i];
            guard.note("data", i, r);
            residuals[i] = r;
            seed[0] = scale * r;
        };
        if (with_grad) {
            engine.eval_vjp(pts, n, deriv::Mode::Value, bundles, seed_fn, grad);
        } else {
            engine.eval_bundles(pts, n, deriv::Mode::Value, bundles);
            double dummy[2 * deriv::kMaxInput + 1];
            for (int i = 0; i < n; ++i) {
                std::fill(std::begin(dummy), std::end(dummy), 0.0);
                seed_fn(i, bundles.data() + static_cast<size_t>(i) * W, dummy);
            }
        }
        guard.check();
        out.data = mean_sq(residuals);
    }

    out.total = weights.w_pde * out.pde + weights.w_bc * out.bc +
                weights.w_ic_value * out.ic_value + weights.w_ic_velocity * out.ic_velocity +
                weights.w_data * out.data;
    return out;
}

} // namespace wavepinn
