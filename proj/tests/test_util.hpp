#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wavepinn/geometry.hpp"
#include "wavepinn/normalize.hpp"
#include "wavepinn/rng.hpp"

namespace wavepinn::test {

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// ---------------------------------------------------------------------------
// Strict CSV reader: one header row, uniform column count, no embedded quotes
// or CR characters, LF row separator, '.' decimal separator.
// ---------------------------------------------------------------------------
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline Csv read_strict_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open csv: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    const std::string text = buf.str();
    if (text.empty() || text.back() != '\n')
        throw std::runtime_error("csv must end with a newline: " + path);

    Csv csv;
    std::vector<std::string> row;
    std::string field;
    bool first_line = true;
    for (char c : text) {
        if (c == '"' || c == '\r')
            throw std::runtime_error("csv contains quoting or CR characters: " + path);
        if (c == ',') {
            row.push_back(field);
            field.clear();
        } else if (c == '\n') {
            row.push_back(field);
            field.clear();
            if (first_line) {
                csv.header = row;
                first_line = false;
            } else {
                if (row.size() != csv.header.size())
                    throw std::runtime_error("csv row width mismatch: " + path);
                csv.rows.push_back(row);
            }
            row.clear();
        } else {
            field += c;
        }
    }
    return csv;
}

inline std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// Random smooth closed-form function with hand-coded derivatives:
//   g(z) = A sin(k . z + phi) + B prod_d (alpha_d + beta_d z_d + gamma_d z_d^2)
// in physical coordinates, exposed in network coordinates through a
// normalization plan (the same composition the solver applies to networks).
// ---------------------------------------------------------------------------
struct SmoothTestFn {
    int dim = 3; // space + time coords
    double A = 1, B = 1, phi = 0;
    std::array<double, 4> k{};
    std::array<double, 4> alpha{}, beta{}, gamma{};

    static SmoothTestFn random(int dim, Rng& rng) {
        SmoothTestFn f;
        f.dim = dim;
        f.A = rng.uniform(0.5, 2.0);
        f.B = rng.uniform(0.5, 2.0);
        f.phi = rng.uniform(0, 6.28);
        for (int c = 0; c < dim; ++c) {
            f.k[c] = rng.uniform(-1.0, 1.0);
            f.alpha[c] = rng.uniform(0.5, 1.5);
            f.beta[c] = rng.uniform(-0.2, 0.2);
            f.gamma[c] = rng.uniform(-0.05, 0.05);
        }
        return f;
    }

    deriv::DerivativeBundle eval_physical(std::span<const double> z) const {
        double dot = phi;
        for (int c = 0; c < dim; ++c) dot += k[c] * z[c];
        const double sn = std::sin(dot), cs = std::cos(dot);
        std::array<double, 4> p{}, p1{}, p2{};
        double prod = 1;
        for (int c = 0; c < dim; ++c) {
            p[c] = alpha[c] + beta[c] * z[c] + gamma[c] * z[c] * z[c];
            p1[c] = beta[c] + 2 * gamma[c] * z[c];
            p2[c] = 2 * gamma[c];
            prod *= p[c];
        }
        deriv::DerivativeBundle b;
        b.value = A * sn + B * prod;
        for (int c = 0; c < dim; ++c) {
            double rest = 1;
            for (int d = 0; d < dim; ++d)
                if (d != c) rest *= p[d];
            b.grad[c] = A * k[c] * cs + B * p1[c] * rest;
            b.diag2[c] = -A * k[c] * k[c] * sn + B * p2[c] * rest;
        }
        return b;
    }
};

/// The test function seen in network coordinates under a plan: evaluates at
/// the mapped-back physical point and applies the affine chain-rule factors.
class MappedTestFn : public BundleFn {
public:
    MappedTestFn(const SmoothTestFn& fn, const NormalizationPlan& plan)
        : fn_(&fn), plan_(&plan) {}

    deriv::DerivativeBundle eval(std::span<const double> z) const override {
        const SpaceTimePoint p = plan_->map_to_physical(z);
        std::array<double, 4> phys{};
        for (int a = 0; a < plan_->dim; ++a) phys[a] = p.x[a];
        phys[plan_->dim] = p.t;
        deriv::DerivativeBundle b =
            fn_->eval_physical(std::span<const double>(phys.data(), plan_->dim + 1));
        for (int a = 0; a < plan_->dim; ++a) {
            const double s = plan_->space_scaled() ? plan_->s[a] : 1.0;
            b.grad[a] *= s;
            b.diag2[a] *= s * s;
        }
        const double st = plan_->time_scaled() ? plan_->s_T : 1.0;
        b.grad[plan_->dim] *= st;
        b.diag2[plan_->dim] *= st * st;
        return b;
    }

private:
    const SmoothTestFn* fn_;
    const NormalizationPlan* plan_;
};

/// Fixed bundle regardless of input (constant surrogates in residual tests).
class ConstBundleFn : public BundleFn {
public:
    explicit ConstBundleFn(deriv::DerivativeBundle b) : b_(b) {}
    deriv::DerivativeBundle eval(std::span<const double>) const override { return b_; }

private:
    deriv::DerivativeBundle b_;
};

inline SpaceTimePoint random_interior_point(const WaveProblem& pr, Rng& rng) {
    for (;;) {
        SpaceTimePoint p;
        p.dim = pr.dim;
        for (int a = 0; a < pr.dim; ++a)
            p.x[a] = rng.uniform(pr.domain.bounds[a][0], pr.domain.bounds[a][1]);
        p.t = rng.uniform(pr.time.t0, pr.time.t_max);
        if (!pr.domain.inside_hole(std::span<const double>(p.x.data(), pr.dim))) return p;
    }
}

} // namespace wavepinn::test
