#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavepinn/error.hpp"
#include "wavepinn/loss.hpp"
#include "wavepinn/problems.hpp"
#include "test_util.hpp"

using namespace wavepinn;

namespace {

struct Fixture {
    WaveProblem problem;
    NormalizationPlan plan;
    FfmNetwork net;

    explicit Fixture(const std::string& name, NormMode mode = NormMode::None, uint64_t seed = 5)
        : problem(get_problem(name)),
          plan(NormalizationPlan::make(mode, problem.domain, problem.time)),
          net(init_network([&] {
              NetworkConfig c;
              c.input_dim = problem.dim + 1;
              c.subnet_count = 2;
              c.hidden_widths = {10, 8};
              c.init_seed = seed;
              return c;
          }())) {}
};

} // namespace

TEST_CASE("total is the weighted sum and equals the plain sum at unit weights") {
    Fixture f("example1_small");
    deriv::Engine engine(f.net);
    Rng rng(3);
    const TrainingBatch batch = sample_training_batch(f.problem, {64, 16, 16}, rng);

    const LossBreakdown l = assemble_loss(f.net, engine, f.plan, f.problem, batch, LossWeights{});
    CHECK(l.total == l.pde + l.bc + l.ic_value + l.ic_velocity + l.data);
    CHECK(l.data == 0.0);
    CHECK(l.pde > 0.0);

    LossWeights w;
    w.w_pde = 2.0;
    w.w_bc = 0.5;
    w.w_ic_value = 3.0;
    w.w_ic_velocity = 0.0;
    const LossBreakdown lw = assemble_loss(f.net, engine, f.plan, f.problem, batch, w);
    CHECK(lw.pde == l.pde);
    CHECK(lw.total ==
          doctest::Approx(2.0 * l.pde + 0.5 * l.bc + 3.0 * l.ic_value).epsilon(1e-15));
    CHECK(lw.total >= l.total * 0.0); // components nonnegative
}

TEST_CASE("boundary component follows the declared boundary kind") {
    // Dirichlet: mean squared (value - g) at mapped points
    Fixture fd("example1_small");
    deriv::Engine ed(fd.net);
    Rng rng(9);
    const TrainingBatch batch = sample_training_batch(fd.problem, {8, 12, 4}, rng);
    const LossBreakdown l = assemble_loss(fd.net, ed, fd.plan, fd.problem, batch, LossWeights{});

    double acc = 0;
    for (const BoundaryPoint& bp : batch.boundary) {
        double z[3];
        fd.plan.map_to_unit(bp.point, z);
        const double r = fd.net.forward(std::span<const double>(z, 3)) - fd.problem.boundary_data(bp);
        acc += r * r;
    }
    CHECK(l.bc == doctest::Approx(acc / batch.boundary.size()).epsilon(1e-13));

    // Neumann: mean squared (scaled normal derivative - g)
    Fixture fn("example3_porous", NormMode::Spatial);
    deriv::Engine en(fn.net);
    Rng rng2(10);
    const TrainingBatch nb = sample_training_batch(fn.problem, {8, 12, 4}, rng2);
    const LossBreakdown ln = assemble_loss(fn.net, en, fn.plan, fn.problem, nb, LossWeights{});
    deriv::Engine probe(fn.net);
    double accn = 0;
    for (const BoundaryPoint& bp : nb.boundary) {
        double z[3];
        fn.plan.map_to_unit(bp.point, z);
        const deriv::DerivativeBundle b = probe.value_grad_laplacian(std::span<const double>(z, 3));
        double dn = 0;
        for (int a = 0; a < 2; ++a) dn += fn.plan.coeff_space_first(a) * b.grad[a] * bp.normal[a];
        const double r = dn - fn.problem.boundary_data(bp);
        accn += r * r;
    }
    CHECK(ln.bc == doctest::Approx(accn / nb.boundary.size()).epsilon(1e-13));
}

TEST_CASE("components are permutation and duplication invariant") {
    Fixture f("example1_small");
    deriv::Engine engine(f.net);
    Rng rng(21);
    TrainingBatch batch = sample_training_batch(f.problem, {40, 10, 12}, rng);
    const LossBreakdown l1 = assemble_loss(f.net, engine, f.plan, f.problem, batch, LossWeights{});

    TrainingBatch shuffled = batch;
    std::reverse(shuffled.interior.begin(), shuffled.interior.end());
    std::reverse(shuffled.boundary.begin(), shuffled.boundary.end());
    std::reverse(shuffled.initial.begin(), shuffled.initial.end());
    const LossBreakdown l2 =
        assemble_loss(f.net, engine, f.plan, f.problem, shuffled, LossWeights{});
    CHECK(test::rel_diff(l1.pde, l2.pde) <= 1e-12);
    CHECK(test::rel_diff(l1.bc, l2.bc) <= 1e-12);
    CHECK(test::rel_diff(l1.ic_value, l2.ic_value) <= 1e-12);
    CHECK(test::rel_diff(l1.ic_velocity, l2.ic_velocity) <= 1e-12);

    TrainingBatch doubled = batch;
    doubled.interior.insert(doubled.interior.end(), batch.interior.begin(), batch.interior.end());
    doubled.boundary.insert(doubled.boundary.end(), batch.boundary.begin(), batch.boundary.end());
    doubled.initial.insert(doubled.initial.end(), batch.initial.begin(), batch.initial.end());
    const LossBreakdown l3 =
        assemble_loss(f.net, engine, f.plan, f.problem, doubled, LossWeights{});
    CHECK(test::rel_diff(l1.pde, l3.pde) <= 1e-12);
    CHECK(test::rel_diff(l1.bc, l3.bc) <= 1e-12);
    CHECK(test::rel_diff(l1.ic_value, l3.ic_value) <= 1e-12);
    CHECK(test::rel_diff(l1.ic_velocity, l3.ic_velocity) <= 1e-12);
}

TEST_CASE("non-finite residuals raise a numeric error naming the term") {
    Fixture f("example1_small");
    deriv::Engine engine(f.net);
    Rng rng(13);
    const TrainingBatch batch = sample_training_batch(f.problem, {8, 4, 4}, rng);
    WaveProblem broken = f.problem;
    broken.forcing = [](const SpaceTimePoint&, double) {
        return std::numeric_limits<double>::infinity();
    };
    try {
        assemble_loss(f.net, engine, f.plan, broken, batch, LossWeights{});
        FAIL("expected a numeric error");
    } catch (const Error& e) {
        CHECK(e.category == ErrorCategory::Numeric);
        CHECK(std::string(e.what()).find("pde") != std::string::npos);
    }
}

TEST_CASE("empty interior batch is rejected") {
    Fixture f("example1_small");
    deriv::Engine engine(f.net);
    TrainingBatch batch;
    CHECK_THROWS_AS(assemble_loss(f.net, engine, f.plan, f.problem, batch, LossWeights{}), Error);
}

TEST_CASE("data term measures labelled misfit") {
    Fixture f("example1_small");
    deriv::Engine engine(f.net);
    Rng rng(31);
    const TrainingBatch batch = sample_training_batch(f.problem, {16, 4, 4}, rng);

    DataSet data;
    for (int i = 0; i < 10; ++i) {
        const SpaceTimePoint p = test::random_interior_point(f.problem, rng);
        data.points.push_back(p);
        data.values.push_back(f.problem.exact->value(p));
    }
    const LossBreakdown l =
        assemble_loss(f.net, engine, f.plan, f.problem, batch, LossWeights{}, &data);
    double acc = 0;
    for (size_t i = 0; i < data.points.size(); ++i) {
        double z[3];
        f.plan.map_to_unit(data.points[i], z);
        const double r = f.net.forward(std::span<const double>(z, 3)) - data.values[i];
        acc += r * r;
    }
    CHECK(l.data == doctest::Approx(acc / data.points.size()).epsilon(1e-13));
    CHECK(l.total == doctest::Approx(l.pde + l.bc + l.ic_value + l.ic_velocity + l.data)
                         .epsilon(1e-15));
}

TEST_CASE("oracle-level residuals make every component tiny") {
    // mean-squared residuals of the exact solution, assembled the same way
    const WaveProblem pr = get_problem("example2_highfreq");
    for (NormMode mode : {NormMode::None, NormMode::SpatioTemporal}) {
        const NormalizationPlan plan = NormalizationPlan::make(mode, pr.domain, pr.time);
        const NormalizedOracle oracle(pr, plan);
        Rng rng(55);
        const TrainingBatch batch = sample_training_batch(pr, {200, 100, 100}, rng);
        double pde = 0, bc = 0, icv = 0, icd = 0;
        for (const SpaceTimePoint& p : batch.interior)
            pde += std::pow(pde_residual(pr, oracle, plan, p), 2);
        for (const BoundaryPoint& bp : batch.boundary)
            bc += std::pow(boundary_residual(pr, oracle, plan, bp), 2);
        for (const SpaceTimePoint& p : batch.initial) {
            const auto [rv, rp] =
                initial_residuals(pr, oracle, plan, std::span<const double>(p.x.data(), 2));
            icv += rv * rv;
            icd += rp * rp;
        }
        CHECK(pde / batch.interior.size() <= 1e-16);
        CHECK(bc / batch.boundary.size() <= 1e-16);
        CHECK(icv / batch.initial.size() <= 1e-16);
        CHECK(icd / batch.initial.size() <= 1e-16);
    }
}
