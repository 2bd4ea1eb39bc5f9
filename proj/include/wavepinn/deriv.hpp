#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "wavepinn/network.hpp"

namespace wavepinn::deriv {

constexpr int kMaxInput = 4; // up to 3 space dims + time

/// Network output with input gradient and diagonal second derivatives at one
/// point, all with respect to the network's own input coordinates.
struct DerivativeBundle {
    double value = 0;
    std::array<double, kMaxInput> grad{};
    std::array<double, kMaxInput> diag2{};
};

enum class Mode {
    Value,      // value only
    FirstOrder, // value + gradient
    Full,       // value + gradient + diagonal second derivatives
};

/// Rows of the flattened bundle/seed layout: [value, grad..., diag2...].
inline constexpr int bundle_width(int input_dim) { return 1 + 2 * input_dim; }

/// Evaluates bundles and parameter-space vector-Jacobian products for a fixed
/// network architecture. Forward-propagates per input coordinate the triple
/// (h, dh/dz_k, d2h/dz_k2) through every layer and reverse-accumulates through
/// that augmented computation for parameter gradients.
///
/// Points are processed in fixed chunks of kChunk; chunk partial results are
/// combined by an ordered pairwise reduction, so results are bit-identical for
/// any OpenMP thread count, including a single thread.
class Engine {
public:
    static constexpr int kChunk = 32;

    explicit Engine(const FfmNetwork& net);
    ~Engine();
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Re-reads network parameters; call after any parameter update.
    void sync();

    int input_dim() const { return dim_; }
    size_t param_count() const { return net_->param_count(); }
    const FfmNetwork& net() const { return *net_; }

    /// pts: n x input_dim row-major, network coordinates.
    /// bundles: n x bundle_width(input_dim); untracked entries are zero.
    void eval_bundles(std::span<const double> pts, int n, Mode mode, std::span<double> bundles);

    /// After each point's forward pass, seed(i, bundle_row, seed_row) fills the
    /// adjoint seed (same layout as the bundle, any required scaling included);
    /// the reverse pass accumulates sum_i d(seed_i . bundle_i)/dtheta into
    /// grad_accum. seed must be pure: it is invoked from worker threads.
    using SeedFn = std::function<void(int i, const double* bundle, double* seed)>;
    void eval_vjp(std::span<const double> pts, int n, Mode mode, std::span<double> bundles,
                  const SeedFn& seed, std::span<double> grad_accum);

    /// Single-point conveniences.
    DerivativeBundle value_grad_laplacian(std::span<const double> z);
    void vjp_point(std::span<const double> z, const DerivativeBundle& seed,
                   std::span<double> grad_accum);

private:
    struct Workspace;

    void forward_point(Workspace& ws, const double* z, Mode mode);
    void reverse_point(Workspace& ws, const double* seed, Mode mode, double* grad);
    void ensure_pool();

    const FfmNetwork* net_;
    int dim_ = 0;
    std::vector<double> scales_;
    std::vector<double> wt_; // transposed weights, per subnet per layer (in x out)
    std::vector<size_t> wt_offsets_;
    std::vector<Workspace> pool_;
    std::vector<double> partials_; // chunk-partial gradients, reduced in order
};

/// Spec-level operation on a fresh engine (tests and point-wise callers).
DerivativeBundle value_grad_laplacian(const FfmNetwork& net, std::span<const double> z);

/// Plain serial re-implementation used to cross-check the engine kernels; one
/// point at a time, straightforward loops, identical summation order.
namespace ref {
DerivativeBundle value_grad_laplacian(const FfmNetwork& net, std::span<const double> z);
void vjp_point(const FfmNetwork& net, std::span<const double> z, const DerivativeBundle& seed,
               std::span<double> grad_accum);
} // namespace ref

} // namespace wavepinn::deriv
