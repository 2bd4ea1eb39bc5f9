#include "wavepinn/problems.hpp"

#include <cmath>
#include <numbers>

#include "wavepinn/error.hpp"

namespace wavepinn {

namespace {

constexpr double kPi = std::numbers::pi;

Domain box(int dim, double lo, double hi) {
    Domain d;
    d.dim = dim;
    for (int a = 0; a < dim; ++a) d.bounds[a] = {lo, hi};
    return d;
}

/// Default porous layout: radius-pi exclusions on a symmetric lattice,
/// 4 circles in 2D and 8 spheres in 3D inside [0, 10*pi]^dim.
std::vector<Domain::Hole> default_holes(int dim) {
    std::vector<Domain::Hole> holes;
    const double step = 5 * kPi;
    const double start = 2.5 * kPi;
    if (dim == 2) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                holes.push_back({{start + i * step, start + j * step, 0}, kPi});
    } else {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    holes.push_back({{start + i * step, start + j * step, start + k * step}, kPi});
    }
    return holes;
}

/// Dirichlet data is the exact solution restricted to the face; Neumann data
/// is the outward normal derivative of the exact solution (so low faces carry
/// the negated axis derivative).
WaveProblem from_exact(WaveProblem base) {
    if (base.bc_kind == BoundaryKind::Dirichlet) {
        const auto value = base.exact->value;
        base.boundary_data = [value](const BoundaryPoint& bp) { return value(bp.point); };
    } else {
        const auto derivatives = base.exact->derivatives;
        const int dim = base.dim;
        base.boundary_data = [derivatives, dim](const BoundaryPoint& bp) {
            std::array<double, 4> grad{}, diag2{};
            derivatives(bp.point, std::span<double>(grad.data(), dim + 1),
                        std::span<double>(diag2.data(), dim + 1));
            double dn = 0;
            for (int a = 0; a < dim; ++a) dn += grad[a] * bp.normal[a];
            return dn;
        };
    }
    const auto value = base.exact->value;
    const auto derivatives = base.exact->derivatives;
    const double t0 = base.time.t0;
    const int dim = base.dim;
    base.initial_value = [value, t0, dim](std::span<const double> x) {
        SpaceTimePoint p;
        p.dim = dim;
        for (int a = 0; a < dim; ++a) p.x[a] = x[a];
        p.t = t0;
        return value(p);
    };
    base.initial_velocity = [derivatives, t0, dim](std::span<const double> x) {
        SpaceTimePoint p;
        p.dim = dim;
        for (int a = 0; a < dim; ++a) p.x[a] = x[a];
        p.t = t0;
        std::array<double, 4> grad{}, diag2{};
        derivatives(p, std::span<double>(grad.data(), dim + 1),
                    std::span<double>(diag2.data(), dim + 1));
        return grad[dim];
    };
    return base;
}

WaveProblem example1(bool large) {
    WaveProblem pr;
    pr.name = large ? "example1_large" : "example1_small";
    pr.dim = 2;
    pr.a_sq = 0.5;
    pr.domain = box(2, 0.0, large ? 10 * kPi : 2 * kPi);
    pr.time = {0.0, large ? 10.0 : 2.0};
    pr.forcing = [](const SpaceTimePoint& p, double) { return 12.0 * p.t * p.t; };
    pr.forcing_du = [](const SpaceTimePoint&, double) { return 0.0; };
    pr.bc_kind = BoundaryKind::Dirichlet;
    pr.exact = WaveProblem::ExactSolution{
        [](const SpaceTimePoint& p) {
            return std::pow(p.t, 4) + std::sin(p.x[0]) * std::sin(p.x[1]) * std::sin(p.t);
        },
        [](const SpaceTimePoint& p, std::span<double> grad, std::span<double> diag2) {
            const double s1 = std::sin(p.x[0]), c1 = std::cos(p.x[0]);
            const double s2 = std::sin(p.x[1]), c2 = std::cos(p.x[1]);
            const double st = std::sin(p.t), ct = std::cos(p.t);
            grad[0] = c1 * s2 * st;
            grad[1] = s1 * c2 * st;
            grad[2] = 4.0 * p.t * p.t * p.t + s1 * s2 * ct;
            diag2[0] = -s1 * s2 * st;
            diag2[1] = -s1 * s2 * st;
            diag2[2] = 12.0 * p.t * p.t - s1 * s2 * st;
        }};
    pr.default_eval.kind = EvalSpec::Kind::Grid;
    pr.default_eval.resolution = 128;
    pr.default_eval.t_eval = large ? 2.5 : 0.5;
    return from_exact(std::move(pr));
}

WaveProblem example2() {
    WaveProblem pr;
    pr.name = "example2_highfreq";
    pr.dim = 2;
    pr.a_sq = 0.01;
    pr.domain = box(2, 0.0, 10 * kPi);
    pr.time = {0.0, 10.0};
    pr.forcing = [](const SpaceTimePoint& p, double) { return 12.0 * p.t * p.t; };
    pr.forcing_du = [](const SpaceTimePoint&, double) { return 0.0; };
    pr.bc_kind = BoundaryKind::Dirichlet;
    pr.exact = WaveProblem::ExactSolution{
        [](const SpaceTimePoint& p) {
            return std::pow(p.t, 4) + std::cos(8 * p.x[0]) * std::cos(6 * p.x[1]) * std::sin(p.t);
        },
        [](const SpaceTimePoint& p, std::span<double> grad, std::span<double> diag2) {
            const double c8 = std::cos(8 * p.x[0]), s8 = std::sin(8 * p.x[0]);
            const double c6 = std::cos(6 * p.x[1]), s6 = std::sin(6 * p.x[1]);
            const double st = std::sin(p.t), ct = std::cos(p.t);
            grad[0] = -8.0 * s8 * c6 * st;
            grad[1] = -6.0 * c8 * s6 * st;
            grad[2] = 4.0 * p.t * p.t * p.t + c8 * c6 * ct;
            diag2[0] = -64.0 * c8 * c6 * st;
            diag2[1] = -36.0 * c8 * c6 * st;
            diag2[2] = 12.0 * p.t * p.t - c8 * c6 * st;
        }};
    pr.default_eval.kind = EvalSpec::Kind::Grid;
    pr.default_eval.resolution = 128;
    pr.default_eval.t_eval = 2.5;
    return from_exact(std::move(pr));
}

WaveProblem example3() {
    WaveProblem pr;
    pr.name = "example3_porous";
    pr.dim = 2;
    pr.a_sq = 0.5;
    pr.domain = box(2, 0.0, 10 * kPi);
    pr.domain.holes = default_holes(2);
    pr.time = {0.0, 10.0};
    pr.forcing = [](const SpaceTimePoint& p, double) {
        return 12.0 * p.t * p.t - std::cos(p.x[0]) * std::sin(p.x[1]) * std::sin(p.t);
    };
    pr.forcing_du = [](const SpaceTimePoint&, double) { return 0.0; };
    pr.bc_kind = BoundaryKind::Neumann;
    pr.hole_boundary = false; // data declared on the outer faces only
    pr.exact = WaveProblem::ExactSolution{
        [](const SpaceTimePoint& p) {
            return std::pow(p.t, 4) +
                   p.x[0] * std::sin(p.x[0]) * std::sin(p.x[1]) * std::sin(p.t);
        },
        [](const SpaceTimePoint& p, std::span<double> grad, std::span<double> diag2) {
            const double x1 = p.x[0];
            const double s1 = std::sin(x1), c1 = std::cos(x1);
            const double s2 = std::sin(p.x[1]), c2 = std::cos(p.x[1]);
            const double st = std::sin(p.t), ct = std::cos(p.t);
            grad[0] = (s1 + x1 * c1) * s2 * st;
            grad[1] = x1 * s1 * c2 * st;
            grad[2] = 4.0 * p.t * p.t * p.t + x1 * s1 * s2 * ct;
            diag2[0] = (2.0 * c1 - x1 * s1) * s2 * st;
            diag2[1] = -x1 * s1 * s2 * st;
            diag2[2] = 12.0 * p.t * p.t - x1 * s1 * s2 * st;
        }};
    pr.default_eval.kind = EvalSpec::Kind::Grid;
    pr.default_eval.resolution = 128;
    pr.default_eval.t_eval = 2.5;
    pr.default_eval.exclude_holes = true;
    return from_exact(std::move(pr));
}

WaveProblem example4() {
    WaveProblem pr;
    pr.name = "example4_sphere";
    pr.dim = 3;
    pr.a_sq = 0.5;
    pr.domain = box(3, 0.0, 10 * kPi);
    pr.time = {0.0, 10.0};
    pr.forcing = [](const SpaceTimePoint& p, double) {
        return 12.0 * p.t * p.t + 0.5 * std::sin(p.x[2]);
    };
    pr.forcing_du = [](const SpaceTimePoint&, double) { return 0.0; };
    pr.bc_kind = BoundaryKind::Dirichlet;
    pr.exact = WaveProblem::ExactSolution{
        [](const SpaceTimePoint& p) {
            return std::pow(p.t, 4) + std::sin(p.x[0]) * std::sin(p.x[1]) * std::sin(p.t) +
                   std::sin(p.x[2]);
        },
        [](const SpaceTimePoint& p, std::span<double> grad, std::span<double> diag2) {
            const double s1 = std::sin(p.x[0]), c1 = std::cos(p.x[0]);
            const double s2 = std::sin(p.x[1]), c2 = std::cos(p.x[1]);
            const double s3 = std::sin(p.x[2]), c3 = std::cos(p.x[2]);
            const double st = std::sin(p.t), ct = std::cos(p.t);
            grad[0] = c1 * s2 * st;
            grad[1] = s1 * c2 * st;
            grad[2] = c3;
            grad[3] = 4.0 * p.t * p.t * p.t + s1 * s2 * ct;
            diag2[0] = -s1 * s2 * st;
            diag2[1] = -s1 * s2 * st;
            diag2[2] = -s3;
            diag2[3] = 12.0 * p.t * p.t - s1 * s2 * st;
        }};
    pr.default_eval.kind = EvalSpec::Kind::Sphere;
    pr.default_eval.sphere_center = {5 * kPi, 5 * kPi, 5 * kPi};
    pr.default_eval.sphere_radius = 3.0;
    pr.default_eval.sphere_count = 3000;
    pr.default_eval.t_eval = 2.5;
    return from_exact(std::move(pr));
}

WaveProblem example5() {
    WaveProblem pr;
    pr.name = "example5_porous3d";
    pr.dim = 3;
    pr.a_sq = 1.0;
    pr.domain = box(3, 0.0, 10 * kPi);
    pr.domain.holes = default_holes(3);
    pr.time = {0.0, 10.0};
    pr.forcing = [](const SpaceTimePoint& p, double) {
        return 12.0 * p.t * p.t + 2.0 * std::sin(p.x[0]) * std::sin(p.x[1]);
    };
    pr.forcing_du = [](const SpaceTimePoint&, double) { return 0.0; };
    pr.bc_kind = BoundaryKind::Neumann;
    pr.hole_boundary = false;
    pr.exact = WaveProblem::ExactSolution{
        [](const SpaceTimePoint& p) {
            return std::pow(p.t, 4) + std::sin(p.x[0]) * std::sin(p.x[1]) +
                   std::sin(p.x[2]) * std::sin(p.t);
        },
        [](const SpaceTimePoint& p, std::span<double> grad, std::span<double> diag2) {
            const double s1 = std::sin(p.x[0]), c1 = std::cos(p.x[0]);
            const double s2 = std::sin(p.x[1]), c2 = std::cos(p.x[1]);
            const double s3 = std::sin(p.x[2]), c3 = std::cos(p.x[2]);
            const double st = std::sin(p.t), ct = std::cos(p.t);
            grad[0] = c1 * s2;
            grad[1] = s1 * c2;
            grad[2] = c3 * st;
            grad[3] = 4.0 * p.t * p.t * p.t + s3 * ct;
            diag2[0] = -s1 * s2;
            diag2[1] = -s1 * s2;
            diag2[2] = -s3 * st;
            diag2[3] = 12.0 * p.t * p.t - s3 * st;
        }};
    pr.default_eval.kind = EvalSpec::Kind::Planes;
    pr.default_eval.planes = {{2, 5 * kPi}, {0, 5 * kPi}};
    pr.default_eval.resolution = 84;
    pr.default_eval.t_eval = 2.5;
    pr.default_eval.exclude_holes = true;
    return from_exact(std::move(pr));
}

} // namespace

WaveProblem get_problem(const std::string& name) {
    if (name == "example1_small") return example1(false);
    if (name == "example1_large") return example1(true);
    if (name == "example2_highfreq") return example2();
    if (name == "example3_porous") return example3();
    if (name == "example4_sphere") return example4();
    if (name == "example5_porous3d") return example5();
    throw Error(ErrorCategory::Lookup, "unknown problem: " + name);
}

std::vector<std::string> problem_names() {
    return {"example1_small",  "example1_large",  "example2_highfreq",
            "example3_porous", "example4_sphere", "example5_porous3d"};
}

ExactEval exact_eval(const WaveProblem& problem, const SpaceTimePoint& p) {
    if (!problem.has_exact_derivatives())
        throw Error(ErrorCategory::Unsupported,
                    "problem " + problem.name + " has no closed-form derivative oracle");
    ExactEval e;
    e.u = problem.exact->value(p);
    problem.exact->derivatives(p, std::span<double>(e.grad.data(), problem.dim + 1),
                               std::span<double>(e.diag2.data(), problem.dim + 1));
    return e;
}

} // namespace wavepinn
