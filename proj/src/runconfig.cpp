#include "wavepinn/runconfig.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "wavepinn/error.hpp"
#include "wavepinn/expr.hpp"
#include "wavepinn/report.hpp"

namespace wavepinn {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    double x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw Error(ErrorCategory::Config, "bad numeric value for key " + key + ": " + v);
    return x;
}

long parse_int(const std::string& key, const std::string& v) {
    long x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw Error(ErrorCategory::Config, "bad integer value for key " + key + ": " + v);
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error(ErrorCategory::Config, "bad boolean value for key " + key + ": " + v);
}

std::vector<Domain::Hole> parse_holes(const std::string& raw, int dim) {
    std::vector<Domain::Hole> holes;
    if (raw.empty() || raw == "none") return holes;
    for (const std::string& item : split(raw, ',')) {
        const std::vector<std::string> f = split(item, ':');
        if (static_cast<int>(f.size()) != dim + 1)
            throw Error(ErrorCategory::Config,
                        "hole needs " + std::to_string(dim) + " center components and a radius: " + item);
        Domain::Hole h;
        for (int a = 0; a < dim; ++a) h.center[a] = parse_double("holes", f[a]);
        h.radius = parse_double("holes", f[dim]);
        holes.push_back(h);
    }
    return holes;
}

Expr::Vars vars_at(const SpaceTimePoint& p, double u) {
    Expr::Vars v;
    v.x1 = p.x[0];
    v.x2 = p.x[1];
    v.x3 = p.x[2];
    v.t = p.t;
    v.u = u;
    return v;
}

} // namespace

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "problem") {
        c.problem_name = value;
    } else if (key == "normalization") {
        c.normalization = parse_norm_mode(value);
    } else if (key == "st_compat_time_factor") {
        c.st_compat_time_factor = parse_bool(key, value);
    } else if (key == "hidden_widths") {
        c.network.hidden_widths.clear();
        for (const std::string& t : split(value, ','))
            c.network.hidden_widths.push_back(static_cast<int>(parse_int(key, t)));
    } else if (key == "subnets") {
        c.network.subnet_count = static_cast<int>(parse_int(key, value));
    } else if (key == "scales") {
        c.network.scales.clear();
        if (value != "auto")
            for (const std::string& t : split(value, ','))
                c.network.scales.push_back(parse_double(key, t));
    } else if (key == "first_layer") {
        if (value == "fourier") {
            c.network.first_layer = NetworkConfig::FirstLayer::Fourier;
        } else if (value == "plain") {
            c.network.first_layer = NetworkConfig::FirstLayer::Plain;
        } else {
            throw Error(ErrorCategory::Config, "first_layer must be fourier or plain");
        }
    } else if (key == "init_seed") {
        c.network.init_seed = static_cast<uint64_t>(parse_int(key, value));
    } else if (key == "epochs") {
        c.train.epochs = static_cast<int>(parse_int(key, value));
    } else if (key == "n_interior") {
        c.train.counts.n_interior = static_cast<int>(parse_int(key, value));
    } else if (key == "n_boundary") {
        c.train.counts.n_boundary = static_cast<int>(parse_int(key, value));
    } else if (key == "n_initial") {
        c.train.counts.n_initial = static_cast<int>(parse_int(key, value));
    } else if (key == "test_interval") {
        c.train.test_interval = static_cast<int>(parse_int(key, value));
    } else if (key == "lr0") {
        c.train.lr0 = parse_double(key, value);
    } else if (key == "decay_rate") {
        c.train.decay_rate = parse_double(key, value);
    } else if (key == "decay_interval") {
        c.train.decay_interval = static_cast<int>(parse_int(key, value));
    } else if (key == "continuous_decay") {
        c.train.continuous_decay = parse_bool(key, value);
    } else if (key == "beta1") {
        c.train.beta1 = parse_double(key, value);
    } else if (key == "beta2") {
        c.train.beta2 = parse_double(key, value);
    } else if (key == "epsilon") {
        c.train.epsilon = parse_double(key, value);
    } else if (key == "seed") {
        c.train.seed = static_cast<uint64_t>(parse_int(key, value));
    } else if (key == "checkpoint_interval") {
        c.train.checkpoint_interval = static_cast<int>(parse_int(key, value));
    } else if (key == "w_pde") {
        c.weights.w_pde = parse_double(key, value);
    } else if (key == "w_bc") {
        c.weights.w_bc = parse_double(key, value);
    } else if (key == "w_ic_value") {
        c.weights.w_ic_value = parse_double(key, value);
    } else if (key == "w_ic_velocity") {
        c.weights.w_ic_velocity = parse_double(key, value);
    } else if (key == "w_data") {
        c.weights.w_data = parse_double(key, value);
    } else if (key == "out_dir") {
        c.out_dir = value;
    } else if (key == "data_file") {
        c.data_file = value;
    } else if (key == "verbose") {
        c.verbose = parse_bool(key, value);
    } else if (key == "holes") {
        c.holes = value;
    } else if (key.rfind("eval_", 0) == 0) {
        static const std::vector<std::string> known = {
            "set",           "resolution",    "t",     "exclude_holes",
            "sphere_center", "sphere_radius", "sphere_count", "planes"};
        const std::string sub = key.substr(5);
        if (std::find(known.begin(), known.end(), sub) == known.end())
            throw Error(ErrorCategory::Config, "unknown config key: " + key);
        c.eval[sub] = value;
    } else if (key.rfind("custom_", 0) == 0) {
        c.custom[key.substr(7)] = value;
    } else {
        throw Error(ErrorCategory::Config, "unknown config key: " + key);
    }
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig c;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t pos = t.find('=');
        if (pos == std::string::npos)
            throw Error(ErrorCategory::Config,
                        origin + ":" + std::to_string(lineno) + ": expected key = value");
        apply_override(c, trim(t.substr(0, pos)), trim(t.substr(pos + 1)));
    }
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCategory::File, "cannot open config file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), path);
}

namespace {

WaveProblem build_custom_problem(const RunConfig& c) {
    const auto& m = c.custom;
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = m.find(k);
        if (it == m.end())
            throw Error(ErrorCategory::Config, "custom problem requires key custom_" + k);
        return it->second;
    };
    auto get = [&](const std::string& k, const std::string& def) {
        auto it = m.find(k);
        return it == m.end() ? def : it->second;
    };
    WaveProblem pr;
    pr.name = "custom";
    pr.dim = static_cast<int>(parse_int("custom_dim", need("dim")));
    if (pr.dim < 1 || pr.dim > kMaxDim)
        throw Error(ErrorCategory::Config, "custom_dim must be 1..3");
    for (const auto& [k, v] : m) {
        static const std::vector<std::string> known = {
            "dim",     "bounds",        "time",          "a_sq",
            "forcing", "forcing_du",    "bc_kind",       "bc_data",
            "exact",   "initial_value", "initial_velocity", "hole_boundary", "hole_share"};
        bool ok = std::find(known.begin(), known.end(), k) != known.end();
        if (!ok && k.rfind("bc_data_", 0) == 0) {
            const std::string face = k.substr(8);
            for (int a = 0; a < pr.dim; ++a)
                for (const char* side : {"_low", "_high"})
                    if (face == "x" + std::to_string(a + 1) + side) ok = true;
        }
        if (!ok) throw Error(ErrorCategory::Config, "unknown config key: custom_" + k);
        (void)v;
    }
    pr.domain.dim = pr.dim;
    {
        const std::vector<std::string> axes = split(need("bounds"), ',');
        if (static_cast<int>(axes.size()) != pr.dim)
            throw Error(ErrorCategory::Config, "custom_bounds needs one min:max pair per axis");
        for (int a = 0; a < pr.dim; ++a) {
            const std::vector<std::string> mm = split(axes[a], ':');
            if (mm.size() != 2)
                throw Error(ErrorCategory::Config, "custom_bounds entries are min:max");
            pr.domain.bounds[a] = {parse_double("custom_bounds", mm[0]),
                                   parse_double("custom_bounds", mm[1])};
        }
    }
    {
        const std::vector<std::string> mm = split(need("time"), ':');
        if (mm.size() != 2) throw Error(ErrorCategory::Config, "custom_time is t0:t_max");
        pr.time = {parse_double("custom_time", mm[0]), parse_double("custom_time", mm[1])};
    }
    pr.a_sq = parse_double("custom_a_sq", need("a_sq"));

    const Expr forcing = Expr::parse(need("forcing"));
    pr.forcing = [forcing](const SpaceTimePoint& p, double u) {
        return forcing.eval(vars_at(p, u));
    };
    if (m.count("forcing_du")) {
        const Expr fdu = Expr::parse(m.at("forcing_du"));
        pr.forcing_du = [fdu](const SpaceTimePoint& p, double u) {
            return fdu.eval(vars_at(p, u));
        };
    } else {
        pr.forcing_du = [](const SpaceTimePoint&, double) { return 0.0; };
    }

    const std::string kind = get("bc_kind", "dirichlet");
    if (kind == "dirichlet") {
        pr.bc_kind = BoundaryKind::Dirichlet;
    } else if (kind == "neumann") {
        pr.bc_kind = BoundaryKind::Neumann;
    } else {
        throw Error(ErrorCategory::Config, "custom_bc_kind must be dirichlet or neumann");
    }

    // Per-face data: custom_bc_data for every face, custom_bc_data_x<i>_<low|high>
    // overrides one face. Neumann data is the outward normal derivative.
    {
        std::map<int, Expr> face_exprs; // 2*axis + (high ? 1 : 0)
        Expr all;
        bool has_all = false;
        if (m.count("bc_data")) {
            all = Expr::parse(m.at("bc_data"));
            has_all = true;
        }
        for (int a = 0; a < pr.dim; ++a) {
            for (int side = 0; side < 2; ++side) {
                const std::string k =
                    "bc_data_x" + std::to_string(a + 1) + (side ? "_high" : "_low");
                if (m.count(k)) face_exprs.emplace(2 * a + side, Expr::parse(m.at(k)));
            }
        }
        if (!has_all && static_cast<int>(face_exprs.size()) != 2 * pr.dim)
            throw Error(ErrorCategory::Config,
                        "custom problem needs custom_bc_data or one custom_bc_data_x<i>_<side> per face");
        pr.boundary_data = [face_exprs, all, has_all](const BoundaryPoint& bp) {
            if (bp.face.kind != BoundaryFace::Kind::Hole) {
                const int id = 2 * bp.face.index + (bp.face.kind == BoundaryFace::Kind::High);
                auto it = face_exprs.find(id);
                if (it != face_exprs.end()) return it->second.eval(vars_at(bp.point, 0));
            }
            if (!has_all)
                throw Error(ErrorCategory::Config, "no boundary data declared for this face");
            return all.eval(vars_at(bp.point, 0));
        };
    }
    pr.hole_boundary = m.count("hole_boundary") ? parse_bool("custom_hole_boundary", m.at("hole_boundary")) : false;
    if (m.count("hole_share")) pr.hole_share = parse_double("custom_hole_share", m.at("hole_share"));

    const Expr hk = Expr::parse(need("initial_value"));
    const Expr hp = Expr::parse(need("initial_velocity"));
    const double t0 = pr.time.t0;
    const int dim = pr.dim;
    pr.initial_value = [hk, t0, dim](std::span<const double> x) {
        SpaceTimePoint p;
        p.dim = dim;
        for (int a = 0; a < dim; ++a) p.x[a] = x[a];
        p.t = t0;
        return hk.eval(vars_at(p, 0));
    };
    pr.initial_velocity = [hp, t0, dim](std::span<const double> x) {
        SpaceTimePoint p;
        p.dim = dim;
        for (int a = 0; a < dim; ++a) p.x[a] = x[a];
        p.t = t0;
        return hp.eval(vars_at(p, 0));
    };

    if (m.count("exact")) {
        const Expr exact = Expr::parse(m.at("exact"));
        pr.exact = WaveProblem::ExactSolution{
            [exact](const SpaceTimePoint& p) { return exact.eval(vars_at(p, 0)); }, nullptr};
    }

    pr.default_eval.kind = EvalSpec::Kind::Grid;
    pr.default_eval.resolution = 64;
    pr.default_eval.t_eval = 0.5 * (pr.time.t0 + pr.time.t_max);
    return pr;
}

} // namespace

WaveProblem RunConfig::make_problem() const {
    WaveProblem pr = (problem_name == "custom") ? build_custom_problem(*this)
                                                : get_problem(problem_name);
    if (!holes.empty()) pr.domain.holes = parse_holes(holes, pr.dim);
    pr.domain.validate();
    pr.time.validate();
    return pr;
}

NormalizationPlan RunConfig::make_plan(const WaveProblem& problem) const {
    return NormalizationPlan::make(normalization, problem.domain, problem.time,
                                   st_compat_time_factor);
}

EvalSpec RunConfig::eval_spec(const WaveProblem& problem) const {
    EvalSpec spec = problem.default_eval;
    for (const auto& [k, v] : eval) {
        if (k == "set") {
            if (v == "grid") {
                spec.kind = EvalSpec::Kind::Grid;
            } else if (v == "sphere") {
                spec.kind = EvalSpec::Kind::Sphere;
            } else if (v == "planes") {
                spec.kind = EvalSpec::Kind::Planes;
            } else {
                throw Error(ErrorCategory::Config, "eval_set must be grid, sphere, or planes");
            }
        } else if (k == "resolution") {
            spec.resolution = static_cast<int>(parse_int("eval_resolution", v));
        } else if (k == "t") {
            spec.t_eval = parse_double("eval_t", v);
        } else if (k == "exclude_holes") {
            spec.exclude_holes = parse_bool("eval_exclude_holes", v);
        } else if (k == "sphere_center") {
            const std::vector<std::string> f = split(v, ':');
            if (static_cast<int>(f.size()) != problem.dim)
                throw Error(ErrorCategory::Config, "eval_sphere_center needs one value per axis");
            for (int a = 0; a < problem.dim; ++a)
                spec.sphere_center[a] = parse_double("eval_sphere_center", f[a]);
        } else if (k == "sphere_radius") {
            spec.sphere_radius = parse_double("eval_sphere_radius", v);
        } else if (k == "sphere_count") {
            spec.sphere_count = static_cast<int>(parse_int("eval_sphere_count", v));
        } else if (k == "planes") {
            spec.planes.clear();
            for (const std::string& item : split(v, ',')) {
                const std::vector<std::string> f = split(item, ':');
                if (f.size() != 2 || f[0].size() != 2 || f[0][0] != 'x')
                    throw Error(ErrorCategory::Config, "eval_planes entries are x<i>:offset");
                spec.planes.push_back(
                    {f[0][1] - '1', parse_double("eval_planes", f[1])});
            }
        }
    }
    return spec;
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream os;
    os << "problem = " << c.problem_name << '\n';
    os << "normalization = " << to_string(c.normalization) << '\n';
    os << "st_compat_time_factor = " << (c.st_compat_time_factor ? "true" : "false") << '\n';
    os << "hidden_widths = ";
    for (size_t i = 0; i < c.network.hidden_widths.size(); ++i)
        os << (i ? "," : "") << c.network.hidden_widths[i];
    os << '\n';
    os << "subnets = " << c.network.subnet_count << '\n';
    os << "scales = ";
    if (c.network.scales.empty()) {
        os << "auto";
    } else {
        for (size_t i = 0; i < c.network.scales.size(); ++i)
            os << (i ? "," : "") << format_double(c.network.scales[i]);
    }
    os << '\n';
    os << "first_layer = "
       << (c.network.first_layer == NetworkConfig::FirstLayer::Fourier ? "fourier" : "plain")
       << '\n';
    os << "init_seed = " << c.network.init_seed << '\n';
    os << "epochs = " << c.train.epochs << '\n';
    os << "n_interior = " << c.train.counts.n_interior << '\n';
    os << "n_boundary = " << c.train.counts.n_boundary << '\n';
    os << "n_initial = " << c.train.counts.n_initial << '\n';
    os << "test_interval = " << c.train.test_interval << '\n';
    os << "lr0 = " << format_double(c.train.lr0) << '\n';
    os << "decay_rate = " << format_double(c.train.decay_rate) << '\n';
    os << "decay_interval = " << c.train.decay_interval << '\n';
    os << "continuous_decay = " << (c.train.continuous_decay ? "true" : "false") << '\n';
    os << "beta1 = " << format_double(c.train.beta1) << '\n';
    os << "beta2 = " << format_double(c.train.beta2) << '\n';
    os << "epsilon = " << format_double(c.train.epsilon) << '\n';
    os << "seed = " << c.train.seed << '\n';
    os << "checkpoint_interval = " << c.train.checkpoint_interval << '\n';
    os << "w_pde = " << format_double(c.weights.w_pde) << '\n';
    os << "w_bc = " << format_double(c.weights.w_bc) << '\n';
    os << "w_ic_value = " << format_double(c.weights.w_ic_value) << '\n';
    os << "w_ic_velocity = " << format_double(c.weights.w_ic_velocity) << '\n';
    os << "w_data = " << format_double(c.weights.w_data) << '\n';
    os << "out_dir = " << c.out_dir << '\n';
    if (!c.data_file.empty()) os << "data_file = " << c.data_file << '\n';
    os << "verbose = " << (c.verbose ? "true" : "false") << '\n';
    if (!c.holes.empty()) os << "holes = " << c.holes << '\n';
    for (const auto& [k, v] : c.eval) os << "eval_" << k << " = " << v << '\n';
    for (const auto& [k, v] : c.custom) os << "custom_" << k << " = " << v << '\n';
    return os.str();
}

DataSet load_data_file(const std::string& path, int dim) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCategory::File, "cannot open data file: " + path);
    DataSet set;
    std::string line;
    if (!std::getline(is, line))
        throw Error(ErrorCategory::File, "data file is empty: " + path);
    const int cols = dim + 2;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::vector<std::string> f = split(t, ',');
        if (static_cast<int>(f.size()) != cols)
            throw Error(ErrorCategory::File,
                        path + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                            " columns");
        SpaceTimePoint p;
        p.dim = dim;
        for (int a = 0; a < dim; ++a) p.x[a] = parse_double("data", f[a]);
        p.t = parse_double("data", f[dim]);
        set.points.push_back(p);
        set.values.push_back(parse_double("data", f[dim + 1]));
    }
    return set;
}

} // namespace wavepinn
