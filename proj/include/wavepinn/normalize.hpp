#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>

#include "wavepinn/deriv.hpp"
#include "wavepinn/geometry.hpp"
#include "wavepinn/problems.hpp"

namespace wavepinn {

enum class NormMode { None, Spatial, Temporal, SpatioTemporal };

NormMode parse_norm_mode(const std::string& s);
const char* to_string(NormMode m);

/// Affine coordinate maps between physical space-time and the network's input
/// cube, plus the chain-rule factors that rescale residuals.
struct NormalizationPlan {
    NormMode mode = NormMode::None;
    int dim = 2;
    std::array<double, kMaxDim> x_min{};
    std::array<double, kMaxDim> s{}; // per-axis extent
    double t0 = 0;
    double s_T = 1;
    /// Scale the second time derivative by 1/s_T instead of 1/s_T^2 in
    /// spatio-temporal mode (compatibility with formulations that fold one
    /// factor of s_T into the loss weighting). Off by default.
    bool st_compat_time_factor = false;

    static NormalizationPlan make(NormMode mode, const Domain& domain, const TimeRange& time,
                                  bool st_compat = false);

    bool space_scaled() const { return mode == NormMode::Spatial || mode == NormMode::SpatioTemporal; }
    bool time_scaled() const { return mode == NormMode::Temporal || mode == NormMode::SpatioTemporal; }

    /// Network input for a physical point; out has dim+1 entries, time last.
    void map_to_unit(const SpaceTimePoint& p, std::span<double> out) const;
    SpaceTimePoint map_to_physical(std::span<const double> z) const;

    double coeff_space_second(int axis) const { return space_scaled() ? 1.0 / (s[axis] * s[axis]) : 1.0; }
    double coeff_space_first(int axis) const { return space_scaled() ? 1.0 / s[axis] : 1.0; }
    double coeff_time_second() const {
        if (!time_scaled()) return 1.0;
        if (st_compat_time_factor && mode == NormMode::SpatioTemporal) return 1.0 / s_T;
        return 1.0 / (s_T * s_T);
    }
    double coeff_time_first() const { return time_scaled() ? 1.0 / s_T : 1.0; }
};

/// Anything that can report value/gradient/diagonal-second-derivatives in
/// network coordinates: the trained network, a closed-form test function, or
/// an exact solution composed with the inverse coordinate map.
class BundleFn {
public:
    virtual ~BundleFn() = default;
    virtual deriv::DerivativeBundle eval(std::span<const double> z) const = 0;
};

/// Exact solution (physical derivatives) viewed as a function of network
/// coordinates; gradient/diag2 pick up the map's scale factors.
class NormalizedOracle : public BundleFn {
public:
    NormalizedOracle(const WaveProblem& problem, const NormalizationPlan& plan)
        : problem_(&problem), plan_(&plan) {}
    deriv::DerivativeBundle eval(std::span<const double> z) const override;

private:
    const WaveProblem* problem_;
    const NormalizationPlan* plan_;
};

// Residual formulas shared by the point-wise API and the training loss.
double pde_residual_from_bundle(const WaveProblem& problem, const NormalizationPlan& plan,
                                const SpaceTimePoint& p, const deriv::DerivativeBundle& b);
double boundary_residual_from_bundle(const WaveProblem& problem, const NormalizationPlan& plan,
                                     const BoundaryPoint& bp, const deriv::DerivativeBundle& b);
std::pair<double, double> initial_residuals_from_bundle(const WaveProblem& problem,
                                                        const NormalizationPlan& plan,
                                                        std::span<const double> x,
                                                        const deriv::DerivativeBundle& b);

// Point-wise residuals of an arbitrary surrogate (physical-coordinate inputs).
double pde_residual(const WaveProblem& problem, const BundleFn& fn, const NormalizationPlan& plan,
                    const SpaceTimePoint& p);
double boundary_residual(const WaveProblem& problem, const BundleFn& fn,
                         const NormalizationPlan& plan, const BoundaryPoint& bp);
std::pair<double, double> initial_residuals(const WaveProblem& problem, const BundleFn& fn,
                                            const NormalizationPlan& plan,
                                            std::span<const double> x);

} // namespace wavepinn
