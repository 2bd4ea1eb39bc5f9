#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavepinn/rng.hpp"

namespace wavepinn {

constexpr int kMaxDim = 3; // spatial dimensions; network input adds time

/// Axis-aligned hyper-rectangle with optional circular/spherical exclusions.
struct Domain {
    struct Hole {
        std::array<double, kMaxDim> center{};
        double radius = 0;
    };

    int dim = 2;
    std::array<std::array<double, 2>, kMaxDim> bounds{}; // per axis {min, max}
    std::vector<Hole> holes;

    void validate() const;
    double extent(int axis) const { return bounds[axis][1] - bounds[axis][0]; }
    bool inside_bounds(std::span<const double> x, bool strict) const;
    bool inside_hole(std::span<const double> x) const;
    /// Strictly inside the bounds and outside every hole.
    bool contains(std::span<const double> x) const;
};

struct TimeRange {
    double t0 = 0;
    double t_max = 1;

    void validate() const;
    double extent() const { return t_max - t0; }
};

struct SpaceTimePoint {
    std::array<double, kMaxDim> x{};
    double t = 0;
    int dim = 2;
};

struct BoundaryFace {
    enum class Kind { Low, High, Hole };
    Kind kind = Kind::Low;
    int index = 0; // axis for Low/High, hole index for Hole
};

struct BoundaryPoint {
    SpaceTimePoint point;
    BoundaryFace face;
    std::array<double, kMaxDim> normal{}; // outward with respect to the material
};

struct TrainingBatch {
    std::vector<SpaceTimePoint> interior;
    std::vector<BoundaryPoint> boundary;
    std::vector<SpaceTimePoint> initial; // t fixed to t0
};

struct BatchCounts {
    int n_interior = 1500;
    int n_boundary = 300;
    int n_initial = 700;

    bool operator==(const BatchCounts&) const = default;
};

/// Latin hypercube sample: n points in (0,1)^d, row-major n x d. Exactly one
/// sample per stratum [k/n,(k+1)/n) in every dimension, with an independent
/// uniform stratum permutation per dimension.
std::vector<double> lhs_sample(int n, int d, Rng& rng);

struct WaveProblem; // problems.hpp

TrainingBatch sample_training_batch(const WaveProblem& problem, const BatchCounts& counts, Rng& rng);

/// Descriptor for a deterministic evaluation point set.
struct EvalSpec {
    enum class Kind { Grid, Sphere, Planes };
    struct Plane {
        int axis = 2;
        double offset = 0;
    };

    Kind kind = Kind::Grid;
    int resolution = 128;       // grid / planes: nodes per axis
    double t_eval = 0;
    bool exclude_holes = true;
    std::array<double, kMaxDim> sphere_center{};
    double sphere_radius = 1;
    int sphere_count = 3000;
    std::vector<Plane> planes;
};

struct TestSet {
    std::vector<SpaceTimePoint> points;
    std::vector<double> exact; // empty when the problem has no exact solution
};

TestSet build_test_set(const WaveProblem& problem, const EvalSpec& spec);

} // namespace wavepinn
