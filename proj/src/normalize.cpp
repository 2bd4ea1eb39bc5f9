#include "wavepinn/normalize.hpp"

#include <cmath>

#include "wavepinn/error.hpp"

namespace wavepinn {

NormMode parse_norm_mode(const std::string& s) {
    if (s == "none") return NormMode::None;
    if (s == "spatial") return NormMode::Spatial;
    if (s == "temporal") return NormMode::Temporal;
    if (s == "spatiotemporal") return NormMode::SpatioTemporal;
    throw Error(ErrorCategory::Config, "unknown normalization mode: " + s);
}

const char* to_string(NormMode m) {
    switch (m) {
        case NormMode::None: return "none";
        case NormMode::Spatial: return "spatial";
        case NormMode::Temporal: return "temporal";
        case NormMode::SpatioTemporal: return "spatiotemporal";
    }
    return "?";
}

NormalizationPlan NormalizationPlan::make(NormMode mode, const Domain& domain,
                                          const TimeRange& time, bool st_compat) {
    domain.validate();
    time.validate();
    NormalizationPlan plan;
    plan.mode = mode;
    plan.dim = domain.dim;
    for (int a = 0; a < domain.dim; ++a) {
        plan.x_min[a] = domain.bounds[a][0];
        plan.s[a] = domain.extent(a);
    }
    plan.t0 = time.t0;
    plan.s_T = time.extent();
    plan.st_compat_time_factor = st_compat;
    return plan;
}

void NormalizationPlan::map_to_unit(const SpaceTimePoint& p, std::span<double> out) const {
    const bool sx = space_scaled();
    const bool st = time_scaled();
    for (int a = 0; a < dim; ++a) out[a] = sx ? (p.x[a] - x_min[a]) / s[a] : p.x[a];
    out[dim] = st ? (p.t - t0) / s_T : p.t;
}

SpaceTimePoint NormalizationPlan::map_to_physical(std::span<const double> z) const {
    const bool sx = space_scaled();
    const bool st = time_scaled();
    SpaceTimePoint p;
    p.dim = dim;
    for (int a = 0; a < dim; ++a) p.x[a] = sx ? x_min[a] + s[a] * z[a] : z[a];
    p.t = st ? t0 + s_T * z[dim] : z[dim];
    return p;
}

deriv::DerivativeBundle NormalizedOracle::eval(std::span<const double> z) const {
    const NormalizationPlan& plan = *plan_;
    const SpaceTimePoint p = plan.map_to_physical(z);
    const ExactEval e = exact_eval(*problem_, p);
    deriv::DerivativeBundle b;
    b.value = e.u;
    const int d = plan.dim;
    for (int a = 0; a < d; ++a) {
        const double scale = plan.space_scaled() ? plan.s[a] : 1.0;
        b.grad[a] = e.grad[a] * scale;
        b.diag2[a] = e.diag2[a] * (scale * scale);
    }
    const double ts = plan.time_scaled() ? plan.s_T : 1.0;
    b.grad[d] = e.grad[d] * ts;
    b.diag2[d] = e.diag2[d] * (ts * ts);
    return b;
}

double pde_residual_from_bundle(const WaveProblem& problem, const NormalizationPlan& plan,
                                const SpaceTimePoint& p, const deriv::DerivativeBundle& b) {
    const int d = problem.dim;
    double lap = 0;
    for (int a = 0; a < d; ++a) lap += plan.coeff_space_second(a) * b.diag2[a];
    const double utt = plan.coeff_time_second() * b.diag2[d];
    return utt - problem.a_sq * lap - problem.forcing(p, b.value);
}

double boundary_residual_from_bundle(const WaveProblem& problem, const NormalizationPlan& plan,
                                     const BoundaryPoint& bp, const deriv::DerivativeBundle& b) {
    if (bp.face.kind == BoundaryFace::Kind::Hole && !problem.hole_boundary)
        throw Error(ErrorCategory::Config,
                    "boundary point lies on a face without declared boundary data");
    const double data = problem.boundary_data(bp);
    if (problem.bc_kind == BoundaryKind::Dirichlet) return b.value - data;
    double dn = 0;
    for (int a = 0; a < problem.dim; ++a)
        dn += plan.coeff_space_first(a) * b.grad[a] * bp.normal[a];
    return dn - data;
}

std::pair<double, double> initial_residuals_from_bundle(const WaveProblem& problem,
                                                        const NormalizationPlan& plan,
                                                        std::span<const double> x,
                                                        const deriv::DerivativeBundle& b) {
    const double rv = b.value - problem.initial_value(x);
    const double rp = plan.coeff_time_first() * b.grad[problem.dim] - problem.initial_velocity(x);
    return {rv, rp};
}

namespace {
deriv::DerivativeBundle eval_mapped(const BundleFn& fn, const NormalizationPlan& plan,
                                    const SpaceTimePoint& p) {
    double z[kMaxDim + 1];
    plan.map_to_unit(p, std::span<double>(z, plan.dim + 1));
    return fn.eval(std::span<const double>(z, plan.dim + 1));
}
} // namespace

double pde_residual(const WaveProblem& problem, const BundleFn& fn, const NormalizationPlan& plan,
                    const SpaceTimePoint& p) {
    return pde_residual_from_bundle(problem, plan, p, eval_mapped(fn, plan, p));
}

double boundary_residual(const WaveProblem& problem, const BundleFn& fn,
                         const NormalizationPlan& plan, const BoundaryPoint& bp) {
    return boundary_residual_from_bundle(problem, plan, bp, eval_mapped(fn, plan, bp.point));
}

std::pair<double, double> initial_residuals(const WaveProblem& problem, const BundleFn& fn,
                                            const NormalizationPlan& plan,
                                            std::span<const double> x) {
    SpaceTimePoint p;
    p.dim = problem.dim;
    for (int a = 0; a < problem.dim; ++a) p.x[a] = x[a];
    p.t = problem.time.t0;
    return initial_residuals_from_bundle(problem, plan, x, eval_mapped(fn, plan, p));
}

} // namespace wavepinn
