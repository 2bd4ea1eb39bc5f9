#include "wavepinn/deriv.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wavepinn/error.hpp"

namespace wavepinn::deriv {

namespace {
inline int feature_width(const FfmNetwork& net, size_t layer_index) {
    const ParamLayout::Layer& l = net.layout.layers[layer_index];
    const bool fourier_first =
        layer_index == 0 && net.config.first_layer == NetworkConfig::FirstLayer::Fourier;
    return fourier_first ? 2 * l.out : l.out;
}
} // namespace

/// Per-thread tape: tuple states per layer boundary plus pre-activation tuples
/// and activation derivative stash, for every subnet of the current point.
struct Engine::Workspace {
    struct SubnetTape {
        // in_tup[l]: input tuples of layer l, channel-major (1+2D) x width
        std::vector<std::vector<double>> in_tup;
        std::vector<std::vector<double>> pre_g;  // D x rows per activated layer
        std::vector<std::vector<double>> pre_s;  // D x rows per activated layer
        std::vector<std::vector<double>> stash;  // 3 x rows (gelu d1,d2,d3)
        std::vector<double> out;                 // (1+2D) output tuple
    };

    std::vector<SubnetTape> subnets;
    std::vector<double> pv;      // pre-activation value channel (temp)
    std::vector<double> adj_a;   // adjoint tuples, ping
    std::vector<double> adj_b;   // adjoint tuples, pong
    std::vector<double> padj;    // pre-activation adjoints, (1+2D) x rows
    std::vector<double> bundle;  // (1+2D)
    std::vector<double> seed;    // (1+2D)

    void init(const FfmNetwork& net) {
        const int D = net.config.input_dim;
        const int C = 1 + 2 * D;
        const size_t L = net.layout.layers.size();
        int wmax = D;
        subnets.assign(net.config.subnet_count, {});
        for (SubnetTape& tape : subnets) {
            tape.in_tup.resize(L);
            tape.pre_g.resize(L - 1);
            tape.pre_s.resize(L - 1);
            tape.stash.resize(L - 1);
            tape.in_tup[0].assign(static_cast<size_t>(C) * D, 0.0);
            for (size_t l = 1; l < L; ++l) {
                const int w = feature_width(net, l - 1);
                tape.in_tup[l].assign(static_cast<size_t>(C) * w, 0.0);
                wmax = std::max(wmax, w);
            }
            for (size_t l = 0; l + 1 < L; ++l) {
                const int rows = net.layout.layers[l].out;
                tape.pre_g[l].assign(static_cast<size_t>(D) * rows, 0.0);
                tape.pre_s[l].assign(static_cast<size_t>(D) * rows, 0.0);
                tape.stash[l].assign(static_cast<size_t>(3) * rows, 0.0);
                wmax = std::max(wmax, rows);
            }
            tape.out.assign(C, 0.0);
        }
        pv.assign(wmax, 0.0);
        adj_a.assign(static_cast<size_t>(C) * wmax, 0.0);
        adj_b.assign(static_cast<size_t>(C) * wmax, 0.0);
        padj.assign(static_cast<size_t>(C) * wmax, 0.0);
        bundle.assign(C, 0.0);
        seed.assign(C, 0.0);
    }
};

Engine::~Engine() = default;

Engine::Engine(const FfmNetwork& net) : net_(&net), dim_(net.config.input_dim) {
    net.config.validate();
    scales_ = net.config.effective_scales();
    const size_t L = net_->layout.layers.size();
    const int Q = net_->config.subnet_count;
    wt_offsets_.assign(static_cast<size_t>(Q) * L + 1, 0);
    size_t off = 0;
    for (int q = 0; q < Q; ++q) {
        for (size_t l = 0; l < L; ++l) {
            wt_offsets_[q * L + l] = off;
            off += static_cast<size_t>(net_->layout.layers[l].in) * net_->layout.layers[l].out;
        }
    }
    wt_offsets_.back() = off;
    wt_.assign(off, 0.0);
    sync();
    int n_threads = 1;
#ifdef _OPENMP
    n_threads = omp_get_max_threads();
#endif
    pool_.resize(std::max(1, n_threads));
    for (Workspace& ws : pool_) ws.init(*net_);
}

void Engine::ensure_pool() {
    size_t want = 1;
#ifdef _OPENMP
    want = static_cast<size_t>(std::max(1, omp_get_max_threads()));
#endif
    while (pool_.size() < want) {
        pool_.emplace_back();
        pool_.back().init(*net_);
    }
}

void Engine::sync() {
    const size_t L = net_->layout.layers.size();
    const int Q = net_->config.subnet_count;
    for (int q = 0; q < Q; ++q) {
        const double* base = net_->params.data() + static_cast<size_t>(q) * net_->layout.per_subnet;
        for (size_t l = 0; l < L; ++l) {
            const ParamLayout::Layer& lay = net_->layout.layers[l];
            double* wt = wt_.data() + wt_offsets_[q * L + l];
            const double* w = base + lay.w_offset;
            for (int j = 0; j < lay.out; ++j)
                for (int k = 0; k < lay.in; ++k) wt[static_cast<size_t>(k) * lay.out + j] = w[static_cast<size_t>(j) * lay.in + k];
        }
    }
}

void Engine::forward_point(Workspace& ws, const double* z, Mode mode) {
    const int D = dim_;
    const int n_g = (mode == Mode::Value) ? 0 : D;
    const int n_s = (mode == Mode::Full) ? D : 0;
    const int C = 1 + n_g + n_s;
    const int S0 = 1 + n_g;
    const size_t L = net_->layout.layers.size();
    const int Q = net_->config.subnet_count;
    const bool fourier = net_->config.first_layer == NetworkConfig::FirstLayer::Fourier;

    std::fill(ws.bundle.begin(), ws.bundle.end(), 0.0);
    for (int q = 0; q < Q; ++q) {
        Workspace::SubnetTape& tape = ws.subnets[q];
        const double* base = net_->params.data() + static_cast<size_t>(q) * net_->layout.per_subnet;
        const double a = scales_[q];

        double* in0 = tape.in_tup[0].data();
        for (int k = 0; k < D; ++k) in0[k] = a * z[k];
        for (int c = 0; c < n_g; ++c)
            for (int k = 0; k < D; ++k) in0[(1 + c) * D + k] = (k == c) ? a : 0.0;
        for (int c = 0; c < n_s; ++c)
            for (int k = 0; k < D; ++k) in0[(S0 + c) * D + k] = 0.0;

        for (size_t l = 0; l < L; ++l) {
            const ParamLayout::Layer& lay = net_->layout.layers[l];
            const double* wt = wt_.data() + wt_offsets_[q * L + l];
            const double* in = tape.in_tup[l].data();
            const int win = lay.in;
            const int rows = lay.out;
            const bool last = (l + 1 == L);

            double* pg = last ? nullptr : tape.pre_g[l].data();
            double* ps = last ? nullptr : tape.pre_s[l].data();
            double* pvv = ws.pv.data();

            // value channel (bias applies here only)
            if (lay.has_bias) {
                const double* b = base + lay.b_offset;
                for (int j = 0; j < rows; ++j) pvv[j] = b[j];
            } else {
                for (int j = 0; j < rows; ++j) pvv[j] = 0.0;
            }
            for (int k = 0; k < win; ++k) {
                const double x = in[k];
                const double* wrow = wt + static_cast<size_t>(k) * rows;
                for (int j = 0; j < rows; ++j) pvv[j] += x * wrow[j];
            }
            if (last) { // scalar output, no activation
                tape.out[0] = pvv[0];
                for (int ch = 1; ch < C; ++ch) {
                    const double* inc = in + static_cast<size_t>(ch) * win;
                    double acc = 0.0;
                    for (int k = 0; k < win; ++k) acc += inc[k] * wt[k];
                    tape.out[ch] = acc;
                }
                break;
            }
            // derivative channels of the pre-activation
            for (int c = 0; c < n_g; ++c) {
                double* dst = pg + static_cast<size_t>(c) * rows;
                for (int j = 0; j < rows; ++j) dst[j] = 0.0;
                const double* inc = in + static_cast<size_t>(1 + c) * win;
                for (int k = 0; k < win; ++k) {
                    const double x = inc[k];
                    const double* wrow = wt + static_cast<size_t>(k) * rows;
                    for (int j = 0; j < rows; ++j) dst[j] += x * wrow[j];
                }
            }
            for (int c = 0; c < n_s; ++c) {
                double* dst = ps + static_cast<size_t>(c) * rows;
                for (int j = 0; j < rows; ++j) dst[j] = 0.0;
                const double* inc = in + static_cast<size_t>(S0 + c) * win;
                for (int k = 0; k < win; ++k) {
                    const double x = inc[k];
                    const double* wrow = wt + static_cast<size_t>(k) * rows;
                    for (int j = 0; j < rows; ++j) dst[j] += x * wrow[j];
                }
            }

            double* next = tape.in_tup[l + 1].data();
            if (l == 0 && fourier) {
                const int m = rows;
                const int w2 = 2 * m;
                for (int j = 0; j < m; ++j) {
                    const double cj = std::cos(pvv[j]);
                    const double sj = std::sin(pvv[j]);
                    next[j] = cj;
                    next[m + j] = sj;
                    for (int c = 0; c < n_g; ++c) {
                        const double g = pg[static_cast<size_t>(c) * m + j];
                        next[(1 + c) * w2 + j] = -sj * g;
                        next[(1 + c) * w2 + m + j] = cj * g;
                    }
                    for (int c = 0; c < n_s; ++c) {
                        const double g = pg[static_cast<size_t>(c) * m + j];
                        const double s = ps[static_cast<size_t>(c) * m + j];
                        next[(S0 + c) * w2 + j] = -cj * g * g - sj * s;
                        next[(S0 + c) * w2 + m + j] = -sj * g * g + cj * s;
                    }
                }
            } else {
                double* st = tape.stash[l].data();
                for (int j = 0; j < rows; ++j) {
                    const GeluDerivs gd = gelu_full(pvv[j]);
                    st[j] = gd.d1;
                    st[rows + j] = gd.d2;
                    st[2 * rows + j] = gd.d3;
                    next[j] = gd.value;
                    for (int c = 0; c < n_g; ++c) {
                        const double g = pg[static_cast<size_t>(c) * rows + j];
                        next[(1 + c) * rows + j] = gd.d1 * g;
                    }
                    for (int c = 0; c < n_s; ++c) {
                        const double g = pg[static_cast<size_t>(c) * rows + j];
                        const double s = ps[static_cast<size_t>(c) * rows + j];
                        next[(S0 + c) * rows + j] = gd.d2 * g * g + gd.d1 * s;
                    }
                }
            }
        }
        for (int ch = 0; ch < C; ++ch) ws.bundle[ch] += tape.out[ch];
    }
    for (int ch = 0; ch < C; ++ch) ws.bundle[ch] /= Q;
    for (int ch = C; ch < 1 + 2 * D; ++ch) ws.bundle[ch] = 0.0;
}

void Engine::reverse_point(Workspace& ws, const double* seed, Mode mode, double* grad) {
    const int D = dim_;
    const int n_g = (mode == Mode::Value) ? 0 : D;
    const int n_s = (mode == Mode::Full) ? D : 0;
    const int C = 1 + n_g + n_s;
    const int S0 = 1 + n_g;
    const size_t L = net_->layout.layers.size();
    const int Q = net_->config.subnet_count;
    const bool fourier = net_->config.first_layer == NetworkConfig::FirstLayer::Fourier;

    for (int q = 0; q < Q; ++q) {
        Workspace::SubnetTape& tape = ws.subnets[q];
        const double* base = net_->params.data() + static_cast<size_t>(q) * net_->layout.per_subnet;
        double* gbase = grad + static_cast<size_t>(q) * net_->layout.per_subnet;

        // output layer (linear, rows == 1)
        {
            const ParamLayout::Layer& lay = net_->layout.layers[L - 1];
            const double* in = tape.in_tup[L - 1].data();
            const int win = lay.in;
            double* adj = ws.adj_a.data();
            const double* w = base + lay.w_offset;
            double* gw = gbase + lay.w_offset;
            for (int ch = 0; ch < C; ++ch) {
                const double y = seed[ch] / Q;
                const double* inc = in + static_cast<size_t>(ch) * win;
                double* adjc = adj + static_cast<size_t>(ch) * win;
                for (int k = 0; k < win; ++k) gw[k] += y * inc[k];
                for (int k = 0; k < win; ++k) adjc[k] = y * w[k];
            }
            gbase[lay.b_offset] += seed[0] / Q;
        }

        for (size_t li = L - 1; li-- > 0;) {
            const ParamLayout::Layer& lay = net_->layout.layers[li];
            const int rows = lay.out;
            const int win = lay.in;
            const double* in = tape.in_tup[li].data();
            const double* pg = tape.pre_g[li].data();
            const double* ps = tape.pre_s[li].data();
            const double* adj = ws.adj_a.data(); // adjoints of this layer's outputs
            double* padj = ws.padj.data();       // adjoints of pre-activation tuples

            if (li == 0 && fourier) {
                const int m = rows;
                const int w2 = 2 * m;
                const double* feat = tape.in_tup[1].data();
                for (int j = 0; j < m; ++j) {
                    const double cj = feat[j];
                    const double sj = feat[m + j];
                    double acc = -sj * adj[j] + cj * adj[m + j];
                    for (int c = 0; c < n_g; ++c) {
                        const double g = pg[static_cast<size_t>(c) * m + j];
                        const double* ac = adj + static_cast<size_t>(1 + c) * w2;
                        acc += -cj * g * ac[j] - sj * g * ac[m + j];
                    }
                    for (int c = 0; c < n_s; ++c) {
                        const double g = pg[static_cast<size_t>(c) * m + j];
                        const double s = ps[static_cast<size_t>(c) * m + j];
                        const double* ac = adj + static_cast<size_t>(S0 + c) * w2;
                        acc += (sj * g * g - cj * s) * ac[j] + (-cj * g * g - sj * s) * ac[m + j];
                    }
                    padj[j] = acc;
                    for (int c = 0; c < n_g; ++c) {
                        const double g = pg[static_cast<size_t>(c) * m + j];
                        const double* agc = adj + static_cast<size_t>(1 + c) * w2;
                        double v = -sj * agc[j] + cj * agc[m + j];
                        if (c < n_s) {
                            const double* asc = adj + static_cast<size_t>(S0 + c) * w2;
                            v += -2.0 * cj * g * asc[j] - 2.0 * sj * g * asc[m + j];
                        }
                        padj[(1 + c) * m + j] = v;
                    }
                    for (int c = 0; c < n_s; ++c) {
                        const double* asc = adj + static_cast<size_t>(S0 + c) * w2;
                        padj[(S0 + c) * m + j] = -sj * asc[j] + cj * asc[m + j];
                    }
                }
            } else {
                const double* st = tape.stash[li].data();
                for (int j = 0; j < rows; ++j) {
                    const double d1 = st[j];
                    const double d2 = st[rows + j];
                    const double d3 = st[2 * rows + j];
                    double acc = d1 * adj[j];
                    for (int c = 0; c < n_g; ++c) {
                        const double g = pg[static_cast<size_t>(c) * rows + j];
                        acc += d2 * g * adj[(1 + c) * rows + j];
                    }
                    for (int c = 0; c < n_s; ++c) {
                        const double g = pg[static_cast<size_t>(c) * rows + j];
                        const double s = ps[static_cast<size_t>(c) * rows + j];
                        acc += (d3 * g * g + d2 * s) * adj[(S0 + c) * rows + j];
                    }
                    padj[j] = acc;
                    for (int c = 0; c < n_g; ++c) {
                        double v = d1 * adj[(1 + c) * rows + j];
                        if (c < n_s) {
                            const double g = pg[static_cast<size_t>(c) * rows + j];
                            v += 2.0 * d2 * g * adj[(S0 + c) * rows + j];
                        }
                        padj[(1 + c) * rows + j] = v;
                    }
                    for (int c = 0; c < n_s; ++c)
                        padj[(S0 + c) * rows + j] = d1 * adj[(S0 + c) * rows + j];
                }
            }

            // linear backward: parameter gradient and input adjoint
            const double* w = base + lay.w_offset;
            double* gw = gbase + lay.w_offset;
            for (int j = 0; j < rows; ++j) {
                double* gww = gw + static_cast<size_t>(j) * win;
                for (int ch = 0; ch < C; ++ch) {
                    const double pj = padj[static_cast<size_t>(ch) * rows + j];
                    const double* inc = in + static_cast<size_t>(ch) * win;
                    for (int k = 0; k < win; ++k) gww[k] += pj * inc[k];
                }
            }
            if (lay.has_bias) {
                double* gb = gbase + lay.b_offset;
                for (int j = 0; j < rows; ++j) gb[j] += padj[j];
            }
            if (li > 0) {
                double* next_adj = ws.adj_b.data();
                for (int ch = 0; ch < C; ++ch) {
                    double* dst = next_adj + static_cast<size_t>(ch) * win;
                    for (int k = 0; k < win; ++k) dst[k] = 0.0;
                    for (int j = 0; j < rows; ++j) {
                        const double pj = padj[static_cast<size_t>(ch) * rows + j];
                        const double* wrow = w + static_cast<size_t>(j) * win;
                        for (int k = 0; k < win; ++k) dst[k] += pj * wrow[k];
                    }
                }
                std::swap(ws.adj_a, ws.adj_b);
            }
        }
    }
}

namespace {
inline void write_bundle_row(double* row, const std::vector<double>& b, int D, Mode mode) {
    const int n_g = (mode == Mode::Value) ? 0 : D;
    const int n_s = (mode == Mode::Full) ? D : 0;
    row[0] = b[0];
    for (int c = 0; c < D; ++c) row[1 + c] = (c < n_g) ? b[1 + c] : 0.0;
    for (int c = 0; c < D; ++c) row[1 + D + c] = (c < n_s) ? b[1 + n_g + c] : 0.0;
}
} // namespace

void Engine::eval_bundles(std::span<const double> pts, int n, Mode mode,
                          std::span<double> bundles) {
    const int D = dim_;
    const int W = bundle_width(D);
    if (static_cast<int>(pts.size()) < n * D || static_cast<int>(bundles.size()) < n * W)
        throw Error(ErrorCategory::Shape, "eval_bundles: buffer sizes do not match n");
    const int nchunks = (n + kChunk - 1) / kChunk;
    ensure_pool();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c = 0; c < nchunks; ++c) {
        Workspace& ws =
#ifdef _OPENMP
            pool_[omp_get_thread_num()];
#else
            pool_[0];
#endif
        const int lo = c * kChunk;
        const int hi = std::min(n, lo + kChunk);
        for (int i = lo; i < hi; ++i) {
            forward_point(ws, pts.data() + static_cast<size_t>(i) * D, mode);
            write_bundle_row(bundles.data() + static_cast<size_t>(i) * W, ws.bundle, D, mode);
        }
    }
}

void Engine::eval_vjp(std::span<const double> pts, int n, Mode mode, std::span<double> bundles,
                      const SeedFn& seed, std::span<double> grad_accum) {
    const int D = dim_;
    const int W = bundle_width(D);
    const size_t np = param_count();
    if (static_cast<int>(pts.size()) < n * D || static_cast<int>(bundles.size()) < n * W ||
        grad_accum.size() < np)
        throw Error(ErrorCategory::Shape, "eval_vjp: buffer sizes do not match n");
    const int n_g = (mode == Mode::Value) ? 0 : D;
    const int n_s = (mode == Mode::Full) ? D : 0;
    const int S0 = 1 + n_g;
    const int nchunks = (n + kChunk - 1) / kChunk;
    partials_.assign(static_cast<size_t>(nchunks) * np, 0.0);
    ensure_pool();

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c = 0; c < nchunks; ++c) {
        Workspace& ws =
#ifdef _OPENMP
            pool_[omp_get_thread_num()];
#else
            pool_[0];
#endif
        double* partial = partials_.data() + static_cast<size_t>(c) * np;
        const int lo = c * kChunk;
        const int hi = std::min(n, lo + kChunk);
        for (int i = lo; i < hi; ++i) {
            double* brow = bundles.data() + static_cast<size_t>(i) * W;
            forward_point(ws, pts.data() + static_cast<size_t>(i) * D, mode);
            write_bundle_row(brow, ws.bundle, D, mode);
            std::fill(ws.seed.begin(), ws.seed.end(), 0.0);
            seed(i, brow, ws.seed.data());
            // repack external (value, grad[D], diag2[D]) layout to active channels
            double packed[1 + 2 * kMaxInput];
            packed[0] = ws.seed[0];
            for (int k = 0; k < n_g; ++k) packed[1 + k] = ws.seed[1 + k];
            for (int k = 0; k < n_s; ++k) packed[S0 + k] = ws.seed[1 + D + k];
            reverse_point(ws, packed, mode, partial);
        }
    }
    // ordered pairwise reduction over chunk index: thread-count independent
    for (int stride = 1; stride < nchunks; stride *= 2) {
        for (int i = 0; i + stride < nchunks; i += 2 * stride) {
            double* dst = partials_.data() + static_cast<size_t>(i) * np;
            const double* src = partials_.data() + static_cast<size_t>(i + stride) * np;
            for (size_t k = 0; k < np; ++k) dst[k] += src[k];
        }
    }
    if (nchunks > 0)
        for (size_t k = 0; k < np; ++k) grad_accum[k] += partials_[k];
}

DerivativeBundle Engine::value_grad_laplacian(std::span<const double> z) {
    if (static_cast<int>(z.size()) != dim_)
        throw Error(ErrorCategory::Shape, "value_grad_laplacian: input size mismatch");
    std::vector<double> row(bundle_width(dim_));
    eval_bundles(z, 1, Mode::Full, row);
    DerivativeBundle b;
    b.value = row[0];
    for (int k = 0; k < dim_; ++k) {
        b.grad[k] = row[1 + k];
        b.diag2[k] = row[1 + dim_ + k];
    }
    return b;
}

void Engine::vjp_point(std::span<const double> z, const DerivativeBundle& seed,
                       std::span<double> grad_accum) {
    std::vector<double> row(bundle_width(dim_));
    eval_vjp(
        z, 1, Mode::Full, row,
        [&](int, const double*, double* s) {
            s[0] = seed.value;
            for (int k = 0; k < dim_; ++k) {
                s[1 + k] = seed.grad[k];
                s[1 + dim_ + k] = seed.diag2[k];
            }
        },
        grad_accum);
}

DerivativeBundle value_grad_laplacian(const FfmNetwork& net, std::span<const double> z) {
    Engine engine(net);
    return engine.value_grad_laplacian(z);
}

// ---------------------------------------------------------------------------
// Serial reference: independent one-point implementation with the same
// summation order (bias first, then ascending input index; channels in
// value/grad/diag2 order). Used to cross-check the engine bit-for-bit.
// ---------------------------------------------------------------------------
namespace ref {

namespace {

struct Tuples {
    std::vector<double> h;               // value
    std::vector<std::vector<double>> g;  // per coord
    std::vector<std::vector<double>> s;  // per coord

    Tuples(int width, int D) : h(width, 0.0), g(D, std::vector<double>(width, 0.0)),
                               s(D, std::vector<double>(width, 0.0)) {}
};

struct LayerTrace {
    Tuples in;       // inputs to the layer
    Tuples pre;      // pre-activation tuples
    std::vector<double> d1, d2, d3; // gelu stash
    LayerTrace(int win, int rows, int D)
        : in(win, D), pre(rows, D), d1(rows), d2(rows), d3(rows) {}
};

void linear(const ParamLayout::Layer& lay, const double* base, const Tuples& in, Tuples& pre,
            int D) {
    const double* w = base + lay.w_offset;
    for (int j = 0; j < lay.out; ++j) {
        double acc = lay.has_bias ? base[lay.b_offset + j] : 0.0;
        for (int k = 0; k < lay.in; ++k) acc += w[static_cast<size_t>(j) * lay.in + k] * in.h[k];
        pre.h[j] = acc;
        for (int c = 0; c < D; ++c) {
            double ag = 0, as = 0;
            for (int k = 0; k < lay.in; ++k) {
                ag += w[static_cast<size_t>(j) * lay.in + k] * in.g[c][k];
                as += w[static_cast<size_t>(j) * lay.in + k] * in.s[c][k];
            }
            pre.g[c][j] = ag;
            pre.s[c][j] = as;
        }
    }
}

} // namespace

DerivativeBundle value_grad_laplacian(const FfmNetwork& net, std::span<const double> z) {
    const int D = net.config.input_dim;
    const size_t L = net.layout.layers.size();
    const bool fourier = net.config.first_layer == NetworkConfig::FirstLayer::Fourier;
    const std::vector<double> scales = net.config.effective_scales();

    DerivativeBundle out;
    std::vector<double> sums(1 + 2 * D, 0.0);
    for (int q = 0; q < net.config.subnet_count; ++q) {
        const double* base = net.params.data() + static_cast<size_t>(q) * net.layout.per_subnet;
        const double a = scales[q];
        Tuples cur(D, D);
        for (int k = 0; k < D; ++k) cur.h[k] = a * z[k];
        for (int c = 0; c < D; ++c) cur.g[c][c] = a;

        for (size_t l = 0; l < L; ++l) {
            const ParamLayout::Layer& lay = net.layout.layers[l];
            Tuples pre(lay.out, D);
            linear(lay, base, cur, pre, D);
            if (l + 1 == L) {
                sums[0] += pre.h[0];
                for (int c = 0; c < D; ++c) {
                    sums[1 + c] += pre.g[c][0];
                    sums[1 + D + c] += pre.s[c][0];
                }
                break;
            }
            if (l == 0 && fourier) {
                const int m = lay.out;
                Tuples nxt(2 * m, D);
                for (int j = 0; j < m; ++j) {
                    const double cj = std::cos(pre.h[j]);
                    const double sj = std::sin(pre.h[j]);
                    nxt.h[j] = cj;
                    nxt.h[m + j] = sj;
                    for (int c = 0; c < D; ++c) {
                        const double g = pre.g[c][j];
                        const double s = pre.s[c][j];
                        nxt.g[c][j] = -sj * g;
                        nxt.g[c][m + j] = cj * g;
                        nxt.s[c][j] = -cj * g * g - sj * s;
                        nxt.s[c][m + j] = -sj * g * g + cj * s;
                    }
                }
                cur = std::move(nxt);
            } else {
                Tuples nxt(lay.out, D);
                for (int j = 0; j < lay.out; ++j) {
                    const GeluDerivs gd = gelu_full(pre.h[j]);
                    nxt.h[j] = gd.value;
                    for (int c = 0; c < D; ++c) {
                        const double g = pre.g[c][j];
                        const double s = pre.s[c][j];
                        nxt.g[c][j] = gd.d1 * g;
                        nxt.s[c][j] = gd.d2 * g * g + gd.d1 * s;
                    }
                }
                cur = std::move(nxt);
            }
        }
    }
    out.value = sums[0] / net.config.subnet_count;
    for (int c = 0; c < D; ++c) {
        out.grad[c] = sums[1 + c] / net.config.subnet_count;
        out.diag2[c] = sums[1 + D + c] / net.config.subnet_count;
    }
    return out;
}

void vjp_point(const FfmNetwork& net, std::span<const double> z, const DerivativeBundle& seed,
               std::span<double> grad_accum) {
    const int D = net.config.input_dim;
    const size_t L = net.layout.layers.size();
    const int Q = net.config.subnet_count;
    const bool fourier = net.config.first_layer == NetworkConfig::FirstLayer::Fourier;
    const std::vector<double> scales = net.config.effective_scales();

    for (int q = 0; q < Q; ++q) {
        const double* base = net.params.data() + static_cast<size_t>(q) * net.layout.per_subnet;
        double* gbase = grad_accum.data() + static_cast<size_t>(q) * net.layout.per_subnet;
        const double a = scales[q];

        // forward, retaining per-layer traces
        std::vector<LayerTrace> trace;
        Tuples cur(D, D);
        for (int k = 0; k < D; ++k) cur.h[k] = a * z[k];
        for (int c = 0; c < D; ++c) cur.g[c][c] = a;
        for (size_t l = 0; l < L; ++l) {
            const ParamLayout::Layer& lay = net.layout.layers[l];
            LayerTrace tr(lay.in, lay.out, D);
            tr.in = cur;
            linear(lay, base, tr.in, tr.pre, D);
            if (l + 1 == L) {
                trace.push_back(std::move(tr));
                break;
            }
            if (l == 0 && fourier) {
                const int m = lay.out;
                Tuples nxt(2 * m, D);
                for (int j = 0; j < m; ++j) {
                    const double cj = std::cos(tr.pre.h[j]);
                    const double sj = std::sin(tr.pre.h[j]);
                    nxt.h[j] = cj;
                    nxt.h[m + j] = sj;
                    for (int c = 0; c < D; ++c) {
                        const double g = tr.pre.g[c][j];
                        const double s = tr.pre.s[c][j];
                        nxt.g[c][j] = -sj * g;
                        nxt.g[c][m + j] = cj * g;
                        nxt.s[c][j] = -cj * g * g - sj * s;
                        nxt.s[c][m + j] = -sj * g * g + cj * s;
                    }
                }
                cur = std::move(nxt);
            } else {
                Tuples nxt(lay.out, D);
                for (int j = 0; j < lay.out; ++j) {
                    const GeluDerivs gd = gelu_full(tr.pre.h[j]);
                    tr.d1[j] = gd.d1;
                    tr.d2[j] = gd.d2;
                    tr.d3[j] = gd.d3;
                    nxt.h[j] = gd.value;
                    for (int c = 0; c < D; ++c) {
                        const double g = tr.pre.g[c][j];
                        const double s = tr.pre.s[c][j];
                        nxt.g[c][j] = gd.d1 * g;
                        nxt.s[c][j] = gd.d2 * g * g + gd.d1 * s;
                    }
                }
                cur = std::move(nxt);
            }
            trace.push_back(std::move(tr));
        }

        // reverse
        const ParamLayout::Layer& lo = net.layout.layers[L - 1];
        Tuples adj(lo.in, D);
        {
            const LayerTrace& tr = trace[L - 1];
            const double* w = base + lo.w_offset;
            double* gw = gbase + lo.w_offset;
            const double yv = seed.value / Q;
            for (int k = 0; k < lo.in; ++k) gw[k] += yv * tr.in.h[k];
            for (int c = 0; c < D; ++c) {
                const double yg = seed.grad[c] / Q;
                for (int k = 0; k < lo.in; ++k) gw[k] += yg * tr.in.g[c][k];
            }
            for (int c = 0; c < D; ++c) {
                const double ys = seed.diag2[c] / Q;
                for (int k = 0; k < lo.in; ++k) gw[k] += ys * tr.in.s[c][k];
            }
            gbase[lo.b_offset] += yv;
            for (int k = 0; k < lo.in; ++k) {
                adj.h[k] = yv * w[k];
                for (int c = 0; c < D; ++c) {
                    adj.g[c][k] = (seed.grad[c] / Q) * w[k];
                    adj.s[c][k] = (seed.diag2[c] / Q) * w[k];
                }
            }
        }

        for (size_t li = L - 1; li-- > 0;) {
            const ParamLayout::Layer& lay = net.layout.layers[li];
            const LayerTrace& tr = trace[li];
            const int rows = lay.out;
            Tuples padj(rows, D);
            if (li == 0 && fourier) {
                const int m = rows;
                for (int j = 0; j < m; ++j) {
                    const double cj = std::cos(tr.pre.h[j]);
                    const double sj = std::sin(tr.pre.h[j]);
                    double acc = -sj * adj.h[j] + cj * adj.h[m + j];
                    for (int c = 0; c < D; ++c) {
                        const double g = tr.pre.g[c][j];
                        acc += -cj * g * adj.g[c][j] - sj * g * adj.g[c][m + j];
                    }
                    for (int c = 0; c < D; ++c) {
                        const double g = tr.pre.g[c][j];
                        const double s = tr.pre.s[c][j];
                        acc += (sj * g * g - cj * s) * adj.s[c][j] +
                               (-cj * g * g - sj * s) * adj.s[c][m + j];
                    }
                    padj.h[j] = acc;
                    for (int c = 0; c < D; ++c) {
                        const double g = tr.pre.g[c][j];
                        double v = -sj * adj.g[c][j] + cj * adj.g[c][m + j];
                        v += -2.0 * cj * g * adj.s[c][j] - 2.0 * sj * g * adj.s[c][m + j];
                        padj.g[c][j] = v;
                        padj.s[c][j] = -sj * adj.s[c][j] + cj * adj.s[c][m + j];
                    }
                }
            } else {
                for (int j = 0; j < rows; ++j) {
                    const double d1 = tr.d1[j], d2 = tr.d2[j], d3 = tr.d3[j];
                    double acc = d1 * adj.h[j];
                    for (int c = 0; c < D; ++c) acc += d2 * tr.pre.g[c][j] * adj.g[c][j];
                    for (int c = 0; c < D; ++c)
                        acc += (d3 * tr.pre.g[c][j] * tr.pre.g[c][j] + d2 * tr.pre.s[c][j]) *
                               adj.s[c][j];
                    padj.h[j] = acc;
                    for (int c = 0; c < D; ++c) {
                        padj.g[c][j] =
                            d1 * adj.g[c][j] + 2.0 * d2 * tr.pre.g[c][j] * adj.s[c][j];
                        padj.s[c][j] = d1 * adj.s[c][j];
                    }
                }
            }

            const double* w = base + lay.w_offset;
            double* gw = gbase + lay.w_offset;
            for (int j = 0; j < rows; ++j) {
                for (int k = 0; k < lay.in; ++k)
                    gw[static_cast<size_t>(j) * lay.in + k] += padj.h[j] * tr.in.h[k];
                for (int c = 0; c < D; ++c)
                    for (int k = 0; k < lay.in; ++k)
                        gw[static_cast<size_t>(j) * lay.in + k] += padj.g[c][j] * tr.in.g[c][k];
                for (int c = 0; c < D; ++c)
                    for (int k = 0; k < lay.in; ++k)
                        gw[static_cast<size_t>(j) * lay.in + k] += padj.s[c][j] * tr.in.s[c][k];
            }
            if (lay.has_bias)
                for (int j = 0; j < rows; ++j) gbase[lay.b_offset + j] += padj.h[j];
            if (li > 0) {
                Tuples nadj(lay.in, D);
                for (int j = 0; j < rows; ++j) {
                    const double* wrow = w + static_cast<size_t>(j) * lay.in;
                    for (int k = 0; k < lay.in; ++k) nadj.h[k] += padj.h[j] * wrow[k];
                    for (int c = 0; c < D; ++c)
                        for (int k = 0; k < lay.in; ++k) {
                            nadj.g[c][k] += padj.g[c][j] * wrow[k];
                            nadj.s[c][k] += padj.s[c][j] * wrow[k];
                        }
                }
                adj = std::move(nadj);
            }
        }
    }
}

} // namespace ref

} // namespace wavepinn::deriv
