// Throughput comparison of the chunked OpenMP kernels against the serial
// reference, with a bitwise agreement check between the two paths.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wavepinn/deriv.hpp"
#include "wavepinn/geometry.hpp"
#include "wavepinn/loss.hpp"
#include "wavepinn/problems.hpp"

using namespace wavepinn;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

} // namespace

int main(int argc, char** argv) {
    const int n_points = argc > 1 ? std::atoi(argv[1]) : 1500;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;

    NetworkConfig cfg;
    cfg.input_dim = 3;
    cfg.subnet_count = 10;
    cfg.init_seed = 42;
    const FfmNetwork net = init_network(cfg);
    deriv::Engine engine(net);

    Rng rng(7);
    std::vector<double> pts(static_cast<size_t>(n_points) * 3);
    for (double& v : pts) v = rng.uniform01();

    const int W = deriv::bundle_width(3);
    std::vector<double> bundles(static_cast<size_t>(n_points) * W);
    std::vector<double> grad(net.param_count());
    auto seed_fn = [&](int, const double* b, double* s) {
        s[0] = b[0];
        for (int k = 0; k < 3; ++k) {
            s[1 + k] = 0.25 * b[1 + k];
            s[4 + k] = -0.5 * b[4 + k];
        }
    };

    printf("network: Q=%d widths 20,15,15,10, %zu parameters; %d points, %d reps\n",
           cfg.subnet_count, net.param_count(), n_points, reps);

    // serial reference
    std::vector<double> grad_ref(net.param_count(), 0.0);
    std::vector<double> bundles_ref(bundles.size());
    double t0 = now_ms();
    for (int r = 0; r < reps; ++r) {
        std::fill(grad_ref.begin(), grad_ref.end(), 0.0);
        // mirror the engine's chunk partials so the reduction order matches
        const int nchunks = (n_points + deriv::Engine::kChunk - 1) / deriv::Engine::kChunk;
        std::vector<std::vector<double>> partials(nchunks,
                                                  std::vector<double>(net.param_count(), 0.0));
        for (int c = 0; c < nchunks; ++c) {
            const int lo = c * deriv::Engine::kChunk;
            const int hi = std::min(n_points, lo + deriv::Engine::kChunk);
            for (int i = lo; i < hi; ++i) {
                const deriv::DerivativeBundle b = deriv::ref::value_grad_laplacian(
                    net, std::span<const double>(pts.data() + static_cast<size_t>(i) * 3, 3));
                double* row = bundles_ref.data() + static_cast<size_t>(i) * W;
                row[0] = b.value;
                for (int k = 0; k < 3; ++k) {
                    row[1 + k] = b.grad[k];
                    row[4 + k] = b.diag2[k];
                }
                double seed[7];
                seed_fn(i, row, seed);
                deriv::DerivativeBundle sb;
                sb.value = seed[0];
                for (int k = 0; k < 3; ++k) {
                    sb.grad[k] = seed[1 + k];
                    sb.diag2[k] = seed[4 + k];
                }
                deriv::ref::vjp_point(net, std::span<const double>(pts.data() + static_cast<size_t>(i) * 3, 3),
                                      sb, partials[c]);
            }
        }
        for (int stride = 1; stride < nchunks; stride *= 2)
            for (int i = 0; i + stride < nchunks; i += 2 * stride)
                for (size_t k = 0; k < net.param_count(); ++k)
                    partials[i][k] += partials[i + stride][k];
        for (size_t k = 0; k < net.param_count(); ++k) grad_ref[k] += partials[0][k];
    }
    const double t_serial = (now_ms() - t0) / reps;
    printf("serial reference: %8.1f ms  (%.0f points/s)\n", t_serial,
           1000.0 * n_points / t_serial);

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    t0 = now_ms();
    for (int r = 0; r < reps; ++r) {
        std::fill(grad.begin(), grad.end(), 0.0);
        engine.eval_vjp(pts, n_points, deriv::Mode::Full, bundles, seed_fn, grad);
    }
    const double t_par = (now_ms() - t0) / reps;
    printf("openmp kernels (%d threads): %8.1f ms  (%.0f points/s, speedup %.2fx)\n", threads,
           t_par, 1000.0 * n_points / t_par, t_serial / t_par);

    const bool bundles_equal = std::memcmp(bundles.data(), bundles_ref.data(),
                                           bundles.size() * sizeof(double)) == 0;
    const bool grads_equal =
        std::memcmp(grad.data(), grad_ref.data(), grad.size() * sizeof(double)) == 0;
    printf("bitwise agreement: bundles %s, gradients %s\n", bundles_equal ? "yes" : "NO",
           grads_equal ? "yes" : "NO");
    return (bundles_equal && grads_equal) ? 0 : 1;
}
