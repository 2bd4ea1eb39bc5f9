#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavepinn/geometry.hpp"

namespace wavepinn {

enum class BoundaryKind { Dirichlet, Neumann };

/// One wave-equation instance: u_tt = a_sq * Laplacian(u) + f(x, t, u) on
/// domain x (t0, t_max], with boundary data per outer face and initial
/// value/velocity at t0.
struct WaveProblem {
    std::string name;
    int dim = 2;
    double a_sq = 1;
    Domain domain;
    TimeRange time;

    /// Excitation f(x, t, u); built-ins ignore u.
    std::function<double(const SpaceTimePoint&, double u)> forcing;
    /// df/du, used by the loss gradient; zero for all built-ins.
    std::function<double(const SpaceTimePoint&, double u)> forcing_du;

    BoundaryKind bc_kind = BoundaryKind::Dirichlet;
    /// Dirichlet: prescribed value. Neumann: prescribed outward normal
    /// derivative (low faces therefore carry the negated axis derivative).
    std::function<double(const BoundaryPoint&)> boundary_data;
    bool hole_boundary = false; // whether hole surfaces carry boundary data
    /// Fraction of boundary points placed on hole surfaces when enabled;
    /// negative means proportional to surface measure.
    double hole_share = -1.0;

    std::function<double(std::span<const double> x)> initial_value;    // u(x, t0)
    std::function<double(std::span<const double> x)> initial_velocity; // u_t(x, t0)

    /// Closed-form solution with hand-coded derivatives (physical coordinates).
    struct ExactSolution {
        std::function<double(const SpaceTimePoint&)> value;
        // grad/diag2 ordered (x1..xd, t); may be absent for custom problems
        std::function<void(const SpaceTimePoint&, std::span<double> grad,
                           std::span<double> diag2)> derivatives;
    };
    std::optional<ExactSolution> exact;

    EvalSpec default_eval;

    bool has_exact_value() const { return exact && exact->value; }
    bool has_exact_derivatives() const { return exact && exact->derivatives; }
};

/// Built-in registry lookup. Known names: example1_small, example1_large,
/// example2_highfreq, example3_porous, example4_sphere, example5_porous3d.
WaveProblem get_problem(const std::string& name);
std::vector<std::string> problem_names();

struct ExactEval {
    double u = 0;
    std::array<double, 4> grad{};
    std::array<double, 4> diag2{};
};
/// Closed-form value and derivatives at p; Unsupported error when absent.
ExactEval exact_eval(const WaveProblem& problem, const SpaceTimePoint& p);

} // namespace wavepinn
