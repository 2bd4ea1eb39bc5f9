#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "wavepinn/error.hpp"
#include "wavepinn/geometry.hpp"
#include "wavepinn/problems.hpp"
#include "test_util.hpp"

using namespace wavepinn;
constexpr double kPi = std::numbers::pi;

TEST_CASE("lhs stratification histogram is identically one") {
    for (auto [n, d, seed] : {std::tuple{4, 1, 1}, {17, 2, 9}, {1500, 3, 123}, {64, 4, 7}}) {
        Rng rng(seed);
        const std::vector<double> s = lhs_sample(n, d, rng);
        for (int j = 0; j < d; ++j) {
            std::vector<int> hist(n, 0);
            for (int i = 0; i < n; ++i) {
                const double v = s[static_cast<size_t>(i) * d + j];
                REQUIRE(v > 0.0);
                REQUIRE(v < 1.0);
                ++hist[static_cast<int>(v * n)];
            }
            CHECK(std::all_of(hist.begin(), hist.end(), [](int h) { return h == 1; }));
        }
    }
}

TEST_CASE("lhs single point and sorted strata") {
    Rng rng(5);
    const std::vector<double> one = lhs_sample(1, 3, rng);
    for (double v : one) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    std::vector<double> four = lhs_sample(4, 1, rng);
    std::sort(four.begin(), four.end());
    for (int k = 0; k < 4; ++k) {
        CHECK(four[k] >= k / 4.0);
        CHECK(four[k] < (k + 1) / 4.0);
    }
}

TEST_CASE("lhs rejects empty requests") {
    Rng rng(1);
    CHECK_THROWS_AS(lhs_sample(0, 2, rng), Error);
    CHECK_THROWS_AS(lhs_sample(3, 0, rng), Error);
}

TEST_CASE("lhs and batches are deterministic under the seed") {
    Rng a(99), b(99);
    CHECK(lhs_sample(50, 3, a) == lhs_sample(50, 3, b));

    const WaveProblem pr = get_problem("example3_porous");
    Rng r1(7), r2(7);
    const TrainingBatch b1 = sample_training_batch(pr, {40, 16, 20}, r1);
    const TrainingBatch b2 = sample_training_batch(pr, {40, 16, 20}, r2);
    REQUIRE(b1.interior.size() == b2.interior.size());
    for (size_t i = 0; i < b1.interior.size(); ++i) {
        CHECK(b1.interior[i].x == b2.interior[i].x);
        CHECK(b1.interior[i].t == b2.interior[i].t);
    }
    for (size_t i = 0; i < b1.boundary.size(); ++i)
        CHECK(b1.boundary[i].point.x == b2.boundary[i].point.x);
}

TEST_CASE("training batch respects counts, bounds, and faces") {
    const WaveProblem pr = get_problem("example1_small");
    Rng rng(2024);
    const TrainingBatch batch = sample_training_batch(pr, {1500, 300, 700}, rng);
    CHECK(batch.interior.size() == 1500);
    CHECK(batch.boundary.size() == 300);
    CHECK(batch.initial.size() == 700);

    for (const SpaceTimePoint& p : batch.interior) {
        for (int a = 0; a < 2; ++a) {
            CHECK(p.x[a] > pr.domain.bounds[a][0]);
            CHECK(p.x[a] < pr.domain.bounds[a][1]);
        }
        CHECK(p.t > pr.time.t0);
        CHECK(p.t < pr.time.t_max);
    }
    for (const SpaceTimePoint& p : batch.initial) CHECK(p.t == pr.time.t0);

    for (const BoundaryPoint& bp : batch.boundary) {
        REQUIRE(bp.face.kind != BoundaryFace::Kind::Hole);
        const int axis = bp.face.index;
        const double target =
            pr.domain.bounds[axis][bp.face.kind == BoundaryFace::Kind::High ? 1 : 0];
        CHECK(std::abs(bp.point.x[axis] - target) <= 1e-12);
        double norm = 0;
        for (int a = 0; a < 2; ++a) norm += bp.normal[a] * bp.normal[a];
        CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-12);
        if (bp.face.kind == BoundaryFace::Kind::Low && axis == 0) {
            CHECK(bp.normal[0] == -1.0);
            CHECK(bp.normal[1] == 0.0);
        }
    }
}

TEST_CASE("porous interior points avoid every hole") {
    const WaveProblem pr = get_problem("example3_porous");
    REQUIRE(pr.domain.holes.size() == 4);
    Rng rng(5);
    const TrainingBatch batch = sample_training_batch(pr, {800, 100, 300}, rng);
    for (const SpaceTimePoint& p : batch.interior)
        for (const Domain::Hole& h : pr.domain.holes) {
            const double dx = p.x[0] - h.center[0];
            const double dy = p.x[1] - h.center[1];
            CHECK(std::sqrt(dx * dx + dy * dy) > h.radius);
        }
}

TEST_CASE("rejection sampling reports covered domains") {
    WaveProblem pr = get_problem("example1_small");
    pr.domain.bounds[0] = {0.0, 1.0};
    pr.domain.bounds[1] = {0.0, 1.0};
    pr.domain.holes = {{{0.5, 0.5, 0.0}, 2.0}};
    Rng rng(3);
    CHECK_THROWS_AS(sample_training_batch(pr, {16, 8, 8}, rng), Error);
}

TEST_CASE("hole-boundary sampling emits inward normals when enabled") {
    WaveProblem pr = get_problem("example3_porous");
    pr.hole_boundary = true;
    Rng rng(11);
    const TrainingBatch batch = sample_training_batch(pr, {64, 200, 32}, rng);
    int n_hole = 0;
    for (const BoundaryPoint& bp : batch.boundary) {
        if (bp.face.kind != BoundaryFace::Kind::Hole) continue;
        ++n_hole;
        const Domain::Hole& h = pr.domain.holes[bp.face.index];
        const double dx = bp.point.x[0] - h.center[0];
        const double dy = bp.point.x[1] - h.center[1];
        CHECK(std::abs(std::sqrt(dx * dx + dy * dy) - h.radius) <= 1e-12);
        // outward w.r.t. material means pointing toward the hole center
        CHECK(bp.normal[0] * dx + bp.normal[1] * dy < 0);
        CHECK(std::abs(std::hypot(bp.normal[0], bp.normal[1]) - 1.0) <= 1e-12);
    }
    CHECK(n_hole > 0);

    pr.hole_share = 0.5;
    Rng rng2(11);
    const TrainingBatch half = sample_training_batch(pr, {64, 200, 32}, rng2);
    int n_half = 0;
    for (const BoundaryPoint& bp : half.boundary)
        if (bp.face.kind == BoundaryFace::Kind::Hole) ++n_half;
    CHECK(n_half == 100);
}

TEST_CASE("grid test set matches the published evaluation shape") {
    const WaveProblem pr = get_problem("example1_large");
    const TestSet set = build_test_set(pr, pr.default_eval);
    CHECK(set.points.size() == 16384); // 128 x 128
    CHECK(set.exact.size() == set.points.size());
    for (const SpaceTimePoint& p : set.points) CHECK(p.t == 2.5);
    CHECK(set.points.front().x[0] == 0.0);
    CHECK(set.points.back().x[0] == doctest::Approx(10 * kPi).epsilon(1e-14));
}

TEST_CASE("sphere test set sits on the sphere inside the domain") {
    const WaveProblem pr = get_problem("example4_sphere");
    const TestSet set = build_test_set(pr, pr.default_eval);
    CHECK(set.points.size() == 3000);
    for (const SpaceTimePoint& p : set.points) {
        const double r = std::sqrt(std::pow(p.x[0] - 5 * kPi, 2) + std::pow(p.x[1] - 5 * kPi, 2) +
                                   std::pow(p.x[2] - 5 * kPi, 2));
        CHECK(std::abs(r - 3.0) <= 1e-12);
    }

    EvalSpec bad = pr.default_eval;
    bad.sphere_radius = 100.0;
    CHECK_THROWS_AS(build_test_set(pr, bad), Error);
}

TEST_CASE("grid exclusion drops hole interiors") {
    const WaveProblem pr = get_problem("example3_porous");
    const TestSet set = build_test_set(pr, pr.default_eval);
    CHECK(set.points.size() < 16384);
    for (const SpaceTimePoint& p : set.points)
        CHECK(!pr.domain.inside_hole(std::span<const double>(p.x.data(), 2)));
}

TEST_CASE("cut-plane test set covers both planes and avoids holes") {
    const WaveProblem pr = get_problem("example5_porous3d");
    const TestSet set = build_test_set(pr, pr.default_eval);
    CHECK(!set.points.empty());
    int on_x3 = 0, on_x1 = 0;
    for (const SpaceTimePoint& p : set.points) {
        CHECK(!pr.domain.inside_hole(std::span<const double>(p.x.data(), 3)));
        if (p.x[2] == doctest::Approx(5 * kPi)) ++on_x3;
        if (p.x[0] == doctest::Approx(5 * kPi)) ++on_x1;
    }
    CHECK(on_x3 > 0);
    CHECK(on_x1 > 0);
    CHECK(on_x3 + on_x1 >= static_cast<int>(set.points.size()));
}

TEST_CASE("test sets are deterministic") {
    const WaveProblem pr = get_problem("example4_sphere");
    const TestSet a = build_test_set(pr, pr.default_eval);
    const TestSet b = build_test_set(pr, pr.default_eval);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].x == b.points[i].x);
}
