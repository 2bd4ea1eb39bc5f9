#include "wavepinn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wavepinn/error.hpp"
#include "wavepinn/problems.hpp"

namespace wavepinn {

void Domain::validate() const {
    if (dim < 1 || dim > kMaxDim)
        throw Error(ErrorCategory::InvalidArgument, "domain dim must be 1.." + std::to_string(kMaxDim));
    for (int a = 0; a < dim; ++a) {
        if (!(bounds[a][0] < bounds[a][1]))
            throw Error(ErrorCategory::InvalidArgument, "domain bounds require min < max per axis");
    }
    for (const Hole& h : holes) {
        if (!(h.radius > 0)) throw Error(ErrorCategory::Geometry, "hole radius must be positive");
        if (!inside_bounds(std::span<const double>(h.center.data(), dim), false))
            throw Error(ErrorCategory::Geometry, "hole center lies outside the domain bounds");
    }
}

bool Domain::inside_bounds(std::span<const double> x, bool strict) const {
    for (int a = 0; a < dim; ++a) {
        if (strict ? !(x[a] > bounds[a][0] && x[a] < bounds[a][1])
                   : !(x[a] >= bounds[a][0] && x[a] <= bounds[a][1]))
            return false;
    }
    return true;
}

bool Domain::inside_hole(std::span<const double> x) const {
    for (const Hole& h : holes) {
        double d2 = 0;
        for (int a = 0; a < dim; ++a) {
            const double d = x[a] - h.center[a];
            d2 += d * d;
        }
        if (d2 <= h.radius * h.radius) return true;
    }
    return false;
}

bool Domain::contains(std::span<const double> x) const {
    return inside_bounds(x, true) && !inside_hole(x);
}

void TimeRange::validate() const {
    if (!(t0 < t_max)) throw Error(ErrorCategory::InvalidArgument, "time range requires t0 < t_max");
}

std::vector<double> lhs_sample(int n, int d, Rng& rng) {
    if (n < 1 || d < 1)
        throw Error(ErrorCategory::InvalidArgument, "lhs_sample requires n >= 1 and d >= 1");
    std::vector<double> out(static_cast<size_t>(n) * d);
    std::vector<uint32_t> perm(n);
    for (int j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), 0u);
        rng.shuffle(perm);
        for (int i = 0; i < n; ++i)
            out[static_cast<size_t>(i) * d + j] = (perm[i] + rng.uniform01()) / n;
    }
    return out;
}

namespace {

SpaceTimePoint map_unit_point(const WaveProblem& pr, const double* u) {
    SpaceTimePoint p;
    p.dim = pr.dim;
    for (int a = 0; a < pr.dim; ++a)
        p.x[a] = pr.domain.bounds[a][0] + u[a] * pr.domain.extent(a);
    p.t = pr.time.t0 + u[pr.dim] * pr.time.extent();
    return p;
}

/// LHS rounds with hole rejection until n accepted spatial(+time) points.
template <typename MakePoint, typename Accept>
std::vector<SpaceTimePoint> rejection_rounds(int n, int lhs_dim, Rng& rng, long cap,
                                             const MakePoint& make, const Accept& accept) {
    std::vector<SpaceTimePoint> out;
    out.reserve(n);
    long drawn = 0;
    while (static_cast<int>(out.size()) < n) {
        const int want = n - static_cast<int>(out.size());
        const std::vector<double> u = lhs_sample(want, lhs_dim, rng);
        drawn += want;
        for (int i = 0; i < want && static_cast<int>(out.size()) < n; ++i) {
            SpaceTimePoint p = make(&u[static_cast<size_t>(i) * lhs_dim]);
            if (accept(p)) out.push_back(p);
        }
        if (drawn > cap)
            throw Error(ErrorCategory::Geometry,
                        "rejection sampling failed: holes cover the domain");
    }
    return out;
}

double hole_surface_measure(const Domain& dom) {
    double m = 0;
    for (const Domain::Hole& h : dom.holes)
        m += (dom.dim == 2) ? 2 * std::numbers::pi * h.radius
                            : 4 * std::numbers::pi * h.radius * h.radius;
    return m;
}

double outer_surface_measure(const Domain& dom) {
    double m = 0;
    for (int a = 0; a < dom.dim; ++a) {
        double face = 1;
        for (int b = 0; b < dom.dim; ++b)
            if (b != a) face *= dom.extent(b);
        m += 2 * face;
    }
    return m;
}

void sample_hole_boundary(const WaveProblem& pr, int hole_index, int count, Rng& rng,
                          std::vector<BoundaryPoint>& out) {
    const Domain::Hole& h = pr.domain.holes[hole_index];
    const int lhs_dim = (pr.dim == 2) ? 2 : 3; // angles (+height) and time
    const std::vector<double> u = lhs_sample(count, lhs_dim, rng);
    for (int i = 0; i < count; ++i) {
        const double* row = &u[static_cast<size_t>(i) * lhs_dim];
        BoundaryPoint bp;
        bp.face = {BoundaryFace::Kind::Hole, hole_index};
        bp.point.dim = pr.dim;
        std::array<double, kMaxDim> dir{};
        if (pr.dim == 2) {
            const double theta = 2 * std::numbers::pi * row[0];
            dir = {std::cos(theta), std::sin(theta), 0};
        } else {
            const double z = -1 + 2 * row[0];
            const double phi = 2 * std::numbers::pi * row[1];
            const double rho = std::sqrt(std::max(0.0, 1 - z * z));
            dir = {rho * std::cos(phi), rho * std::sin(phi), z};
        }
        for (int a = 0; a < pr.dim; ++a) bp.point.x[a] = h.center[a] + h.radius * dir[a];
        bp.point.t = pr.time.t0 + row[lhs_dim - 1] * pr.time.extent();
        // outward with respect to the material: toward the hole center
        double norm = 0;
        for (int a = 0; a < pr.dim; ++a) {
            bp.normal[a] = h.center[a] - bp.point.x[a];
            norm += bp.normal[a] * bp.normal[a];
        }
        norm = std::sqrt(norm);
        for (int a = 0; a < pr.dim; ++a) bp.normal[a] /= norm;
        out.push_back(bp);
    }
}

} // namespace

TrainingBatch sample_training_batch(const WaveProblem& pr, const BatchCounts& counts, Rng& rng) {
    if (counts.n_interior < 1 || counts.n_boundary < 1 || counts.n_initial < 1)
        throw Error(ErrorCategory::InvalidArgument, "batch counts must be positive");
    pr.domain.validate();
    pr.time.validate();

    TrainingBatch batch;
    const int d = pr.dim;

    batch.interior = rejection_rounds(
        counts.n_interior, d + 1, rng, 1000L * counts.n_interior,
        [&](const double* u) { return map_unit_point(pr, u); },
        [&](const SpaceTimePoint& p) {
            return !pr.domain.inside_hole(std::span<const double>(p.x.data(), d));
        });

    // Boundary: faces drawn uniformly; hole surfaces get a measure-proportional
    // share when the problem declares data there.
    int n_outer = counts.n_boundary;
    std::vector<int> per_hole;
    if (pr.hole_boundary && !pr.domain.holes.empty()) {
        const double hm = hole_surface_measure(pr.domain);
        const double om = outer_surface_measure(pr.domain);
        const double share = pr.hole_share >= 0 ? pr.hole_share : hm / (hm + om);
        const int n_holes_total = static_cast<int>(std::lround(counts.n_boundary * share));
        n_outer = counts.n_boundary - n_holes_total;
        per_hole.assign(pr.domain.holes.size(), 0);
        for (int i = 0; i < n_holes_total; ++i)
            ++per_hole[rng.below(pr.domain.holes.size())];
    }

    std::vector<int> per_face(2 * d, 0);
    for (int i = 0; i < n_outer; ++i) ++per_face[rng.below(2 * d)];
    for (int f = 0; f < 2 * d; ++f) {
        const int axis = f / 2;
        const bool high = (f % 2) != 0;
        const int count = per_face[f];
        if (count == 0) continue;
        const std::vector<double> u = lhs_sample(count, d, rng); // d-1 face coords + time
        for (int i = 0; i < count; ++i) {
            const double* row = &u[static_cast<size_t>(i) * d];
            BoundaryPoint bp;
            bp.face = {high ? BoundaryFace::Kind::High : BoundaryFace::Kind::Low, axis};
            bp.point.dim = d;
            int k = 0;
            for (int a = 0; a < d; ++a) {
                if (a == axis) {
                    bp.point.x[a] = pr.domain.bounds[a][high ? 1 : 0];
                } else {
                    bp.point.x[a] = pr.domain.bounds[a][0] + row[k++] * pr.domain.extent(a);
                }
            }
            bp.point.t = pr.time.t0 + row[d - 1] * pr.time.extent();
            bp.normal = {};
            bp.normal[axis] = high ? 1.0 : -1.0;
            batch.boundary.push_back(bp);
        }
    }
    for (size_t h = 0; h < per_hole.size(); ++h)
        if (per_hole[h] > 0)
            sample_hole_boundary(pr, static_cast<int>(h), per_hole[h], rng, batch.boundary);

    batch.initial = rejection_rounds(
        counts.n_initial, d, rng, 1000L * counts.n_initial,
        [&](const double* u) {
            SpaceTimePoint p;
            p.dim = d;
            for (int a = 0; a < d; ++a)
                p.x[a] = pr.domain.bounds[a][0] + u[a] * pr.domain.extent(a);
            p.t = pr.time.t0;
            return p;
        },
        [&](const SpaceTimePoint& p) {
            return !pr.domain.inside_hole(std::span<const double>(p.x.data(), d));
        });

    return batch;
}

namespace {

void append_grid_plane(const WaveProblem& pr, const EvalSpec& spec, int fixed_axis,
                       double fixed_value, std::vector<SpaceTimePoint>& out) {
    const int d = pr.dim;
    std::vector<int> free_axes;
    for (int a = 0; a < d; ++a)
        if (a != fixed_axis) free_axes.push_back(a);

    const int res = spec.resolution;
    std::vector<int> idx(free_axes.size(), 0);
    while (true) {
        SpaceTimePoint p;
        p.dim = d;
        if (fixed_axis >= 0) p.x[fixed_axis] = fixed_value;
        for (size_t k = 0; k < free_axes.size(); ++k) {
            const int a = free_axes[k];
            p.x[a] = pr.domain.bounds[a][0] +
                     (res == 1 ? 0.0 : idx[k] * pr.domain.extent(a) / (res - 1));
        }
        p.t = spec.t_eval;
        if (!spec.exclude_holes ||
            !pr.domain.inside_hole(std::span<const double>(p.x.data(), d)))
            out.push_back(p);
        size_t k = 0;
        for (; k < idx.size(); ++k) {
            if (++idx[k] < res) break;
            idx[k] = 0;
        }
        if (k == idx.size()) break;
    }
}

} // namespace

TestSet build_test_set(const WaveProblem& pr, const EvalSpec& spec) {
    TestSet set;
    switch (spec.kind) {
        case EvalSpec::Kind::Grid:
            append_grid_plane(pr, spec, -1, 0.0, set.points);
            break;
        case EvalSpec::Kind::Sphere: {
            if (pr.dim != 3)
                throw Error(ErrorCategory::Geometry, "sphere evaluation set requires a 3D domain");
            const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
            for (int i = 0; i < spec.sphere_count; ++i) {
                const double z = 1.0 - 2.0 * (i + 0.5) / spec.sphere_count;
                const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                const double phi = golden * i;
                SpaceTimePoint p;
                p.dim = 3;
                p.x[0] = spec.sphere_center[0] + spec.sphere_radius * rho * std::cos(phi);
                p.x[1] = spec.sphere_center[1] + spec.sphere_radius * rho * std::sin(phi);
                p.x[2] = spec.sphere_center[2] + spec.sphere_radius * z;
                p.t = spec.t_eval;
                if (!pr.domain.inside_bounds(std::span<const double>(p.x.data(), 3), false))
                    throw Error(ErrorCategory::Geometry,
                                "sphere evaluation set leaves the domain");
                set.points.push_back(p);
            }
            break;
        }
        case EvalSpec::Kind::Planes: {
            if (spec.planes.empty())
                throw Error(ErrorCategory::InvalidArgument, "plane evaluation set needs planes");
            for (const EvalSpec::Plane& plane : spec.planes) {
                if (plane.axis < 0 || plane.axis >= pr.dim)
                    throw Error(ErrorCategory::InvalidArgument, "plane axis out of range");
                append_grid_plane(pr, spec, plane.axis, plane.offset, set.points);
            }
            break;
        }
    }
    if (pr.has_exact_value()) {
        set.exact.reserve(set.points.size());
        for (const SpaceTimePoint& p : set.points) set.exact.push_back(pr.exact->value(p));
    }
    return set;
}

} // namespace wavepinn
