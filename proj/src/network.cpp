#include "wavepinn/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wavepinn/error.hpp"

namespace wavepinn {

void NetworkConfig::validate() const {
    if (input_dim < 2 || input_dim > 4)
        throw Error(ErrorCategory::Config, "input_dim must be in 2..4 (space dims + time)");
    if (hidden_widths.empty())
        throw Error(ErrorCategory::Config, "at least one hidden layer is required");
    for (int w : hidden_widths)
        if (w < 1) throw Error(ErrorCategory::Config, "hidden widths must be positive");
    if (first_layer == FirstLayer::Fourier && hidden_widths[0] % 2 != 0)
        throw Error(ErrorCategory::Config,
                    "Fourier first layer needs an even width (cos/sin halves)");
    if (subnet_count < 1) throw Error(ErrorCategory::Config, "subnet_count must be >= 1");
    if (!scales.empty() && static_cast<int>(scales.size()) != subnet_count)
        throw Error(ErrorCategory::Config, "scales length must equal subnet_count");
    for (double a : scales)
        if (!(a >= 1.0)) throw Error(ErrorCategory::Config, "subnet scales must satisfy a >= 1");
}

std::vector<double> NetworkConfig::effective_scales() const {
    if (!scales.empty()) return scales;
    std::vector<double> out(subnet_count);
    for (int i = 0; i < subnet_count; ++i) out[i] = i + 1.0;
    return out;
}

ParamLayout ParamLayout::make(const NetworkConfig& config) {
    ParamLayout layout;
    size_t off = 0;
    auto push = [&](int in, int out, bool bias) {
        Layer l;
        l.in = in;
        l.out = out;
        l.has_bias = bias;
        l.w_offset = off;
        off += static_cast<size_t>(in) * out;
        l.b_offset = off;
        if (bias) off += out;
        layout.layers.push_back(l);
    };
    const bool fourier = config.first_layer == NetworkConfig::FirstLayer::Fourier;
    const int first_rows = fourier ? config.hidden_widths[0] / 2 : config.hidden_widths[0];
    push(config.input_dim, first_rows, !fourier);
    for (size_t l = 1; l < config.hidden_widths.size(); ++l)
        push(config.hidden_widths[l - 1], config.hidden_widths[l], true);
    push(config.hidden_widths.back(), 1, true);
    layout.per_subnet = off;
    return layout;
}

GeluDerivs gelu_full(double x) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    constexpr double inv_sqrt2pi = 0.39894228040143267794;
    const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
    const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
    GeluDerivs g;
    g.value = x * cdf;
    g.d1 = cdf + x * pdf;
    g.d2 = (2.0 - x * x) * pdf;
    g.d3 = (x * x * x - 4.0 * x) * pdf;
    return g;
}

GeluValue gelu_with_derivatives(double x) {
    const GeluDerivs g = gelu_full(x);
    return {g.value, g.d1, g.d2};
}

FfmNetwork init_network(const NetworkConfig& config) {
    config.validate();
    FfmNetwork net;
    net.config = config;
    net.layout = ParamLayout::make(config);
    net.params.assign(net.layout.per_subnet * config.subnet_count, 0.0);

    Rng rng(config.init_seed);
    for (int q = 0; q < config.subnet_count; ++q) {
        double* base = net.params.data() + static_cast<size_t>(q) * net.layout.per_subnet;
        for (const ParamLayout::Layer& l : net.layout.layers) {
            const double bound = std::sqrt(6.0 / (l.in + l.out));
            for (int i = 0; i < l.in * l.out; ++i)
                base[l.w_offset + i] = rng.uniform(-bound, bound);
            // biases stay zero
        }
    }
    return net;
}

double FfmNetwork::forward(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != config.input_dim)
        throw Error(ErrorCategory::Shape, "forward: input size does not match input_dim");
    const std::vector<double> scales = config.effective_scales();
    const bool fourier = config.first_layer == NetworkConfig::FirstLayer::Fourier;
    const int width_max = *std::max_element(config.hidden_widths.begin(), config.hidden_widths.end());

    std::vector<double> h(width_max), p(width_max);
    double sum = 0;
    for (int q = 0; q < config.subnet_count; ++q) {
        const double* base = params.data() + static_cast<size_t>(q) * layout.per_subnet;
        const double a = scales[q];
        // first layer
        const ParamLayout::Layer& l0 = layout.layers[0];
        for (int j = 0; j < l0.out; ++j) {
            double acc = l0.has_bias ? base[l0.b_offset + j] : 0.0;
            for (int k = 0; k < l0.in; ++k) acc += base[l0.w_offset + j * l0.in + k] * (a * z[k]);
            p[j] = acc;
        }
        int width;
        if (fourier) {
            const int m = l0.out;
            width = 2 * m;
            for (int j = 0; j < m; ++j) {
                h[j] = std::cos(p[j]);
                h[m + j] = std::sin(p[j]);
            }
        } else {
            width = l0.out;
            for (int j = 0; j < width; ++j) h[j] = gelu_full(p[j]).value;
        }
        // hidden layers
        for (size_t li = 1; li + 1 < layout.layers.size(); ++li) {
            const ParamLayout::Layer& l = layout.layers[li];
            for (int j = 0; j < l.out; ++j) {
                double acc = base[l.b_offset + j];
                for (int k = 0; k < l.in; ++k) acc += base[l.w_offset + j * l.in + k] * h[k];
                p[j] = acc;
            }
            for (int j = 0; j < l.out; ++j) h[j] = gelu_full(p[j]).value;
            width = l.out;
        }
        // linear output
        const ParamLayout::Layer& lo = layout.layers.back();
        double acc = base[lo.b_offset];
        for (int k = 0; k < lo.in; ++k) acc += base[lo.w_offset + k] * h[k];
        sum += acc;
        (void)width;
    }
    return sum / config.subnet_count;
}

std::vector<double> FfmNetwork::first_layer_features(int subnet, std::span<const double> z) const {
    const double a = config.effective_scales().at(subnet);
    const double* base = params.data() + static_cast<size_t>(subnet) * layout.per_subnet;
    const ParamLayout::Layer& l0 = layout.layers[0];
    std::vector<double> p(l0.out);
    for (int j = 0; j < l0.out; ++j) {
        double acc = l0.has_bias ? base[l0.b_offset + j] : 0.0;
        for (int k = 0; k < l0.in; ++k) acc += base[l0.w_offset + j * l0.in + k] * (a * z[k]);
        p[j] = acc;
    }
    if (config.first_layer == NetworkConfig::FirstLayer::Plain) {
        for (double& v : p) v = gelu_full(v).value;
        return p;
    }
    std::vector<double> feat(2 * l0.out);
    for (int j = 0; j < l0.out; ++j) {
        feat[j] = std::cos(p[j]);
        feat[l0.out + j] = std::sin(p[j]);
    }
    return feat;
}

namespace {

std::string hex_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
    return std::string(buf, res.ptr);
}

double parse_hex_double(const std::string& s, const std::string& path) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorCategory::File, "bad number in checkpoint " + path + ": " + s);
    return v;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

void write_vector(std::ostream& os, const char* tag, const std::vector<double>& v) {
    os << tag << ' ' << v.size() << '\n';
    for (double x : v) os << hex_double(x) << '\n';
}

std::vector<double> read_vector(std::istream& is, const std::string& tag_expected,
                                const std::string& path) {
    std::string tag;
    size_t n = 0;
    if (!(is >> tag >> n) || tag != tag_expected)
        throw Error(ErrorCategory::File, "checkpoint " + path + ": expected section " + tag_expected);
    std::vector<double> v(n);
    std::string s;
    for (size_t i = 0; i < n; ++i) {
        if (!(is >> s)) throw Error(ErrorCategory::File, "checkpoint " + path + ": truncated");
        v[i] = parse_hex_double(s, path);
    }
    return v;
}

} // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCategory::File, "cannot write checkpoint: " + path);
    const NetworkConfig& c = ck.net.config;
    os << "wavepinn-checkpoint v1\n";
    os << "problem " << (ck.problem.empty() ? "-" : ck.problem) << '\n';
    os << "normalization " << (ck.normalization.empty() ? "-" : ck.normalization) << '\n';
    os << "input_dim " << c.input_dim << '\n';
    os << "hidden " << join_ints(c.hidden_widths) << '\n';
    os << "subnets " << c.subnet_count << '\n';
    os << "first_layer " << (c.first_layer == NetworkConfig::FirstLayer::Fourier ? "fourier" : "plain")
       << '\n';
    os << "scales";
    for (double a : c.effective_scales()) os << ' ' << hex_double(a);
    os << '\n';
    os << "init_seed " << c.init_seed << '\n';
    os << "train_seed " << ck.train_seed << '\n';
    os << "epoch " << ck.epoch << '\n';
    write_vector(os, "params", ck.net.params);
    if (ck.has_train_state) {
        os << "adam_step " << ck.adam_step << '\n';
        write_vector(os, "adam_m", ck.adam_m);
        write_vector(os, "adam_v", ck.adam_v);
        os << "rng " << ck.rng_state << '\n';
    }
    if (!os) throw Error(ErrorCategory::File, "failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCategory::File, "cannot open checkpoint: " + path);
    std::string magic, version;
    is >> magic >> version;
    if (magic != "wavepinn-checkpoint" || version != "v1")
        throw Error(ErrorCategory::File, "unrecognized checkpoint format: " + path);

    Checkpoint ck;
    NetworkConfig c;
    std::string key;
    auto expect = [&](const char* want) {
        if (!(is >> key) || key != want)
            throw Error(ErrorCategory::File, std::string("checkpoint ") + path + ": expected " + want);
    };
    expect("problem");
    is >> ck.problem;
    if (ck.problem == "-") ck.problem.clear();
    expect("normalization");
    is >> ck.normalization;
    if (ck.normalization == "-") ck.normalization.clear();
    expect("input_dim");
    is >> c.input_dim;
    expect("hidden");
    {
        std::string list;
        is >> list;
        c.hidden_widths.clear();
        std::stringstream ss(list);
        std::string tok;
        while (std::getline(ss, tok, ',')) c.hidden_widths.push_back(std::stoi(tok));
    }
    expect("subnets");
    is >> c.subnet_count;
    expect("first_layer");
    {
        std::string fl;
        is >> fl;
        c.first_layer = (fl == "plain") ? NetworkConfig::FirstLayer::Plain
                                        : NetworkConfig::FirstLayer::Fourier;
    }
    expect("scales");
    {
        c.scales.resize(c.subnet_count);
        std::string s;
        for (int i = 0; i < c.subnet_count; ++i) {
            is >> s;
            c.scales[i] = parse_hex_double(s, path);
        }
    }
    expect("init_seed");
    is >> c.init_seed;
    expect("train_seed");
    is >> ck.train_seed;
    expect("epoch");
    is >> ck.epoch;

    c.validate();
    ck.net.config = c;
    ck.net.layout = ParamLayout::make(c);
    ck.net.params = read_vector(is, "params", path);
    if (ck.net.params.size() != ck.net.layout.per_subnet * static_cast<size_t>(c.subnet_count))
        throw Error(ErrorCategory::File, "checkpoint " + path + ": parameter count mismatch");

    if (is >> key) {
        if (key != "adam_step")
            throw Error(ErrorCategory::File, "checkpoint " + path + ": unexpected section " + key);
        ck.has_train_state = true;
        is >> ck.adam_step;
        ck.adam_m = read_vector(is, "adam_m", path);
        ck.adam_v = read_vector(is, "adam_v", path);
        expect("rng");
        std::getline(is, ck.rng_state);
        if (!ck.rng_state.empty() && ck.rng_state.front() == ' ') ck.rng_state.erase(0, 1);
        if (ck.adam_m.size() != ck.net.params.size() || ck.adam_v.size() != ck.net.params.size())
            throw Error(ErrorCategory::File, "checkpoint " + path + ": optimizer state mismatch");
    }
    return ck;
}

} // namespace wavepinn
