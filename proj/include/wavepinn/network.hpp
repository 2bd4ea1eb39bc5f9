#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wavepinn/rng.hpp"

namespace wavepinn {

struct NetworkConfig {
    enum class FirstLayer { Fourier, Plain };

    int input_dim = 3;                              // space dims + time
    std::vector<int> hidden_widths{20, 15, 15, 10};
    int subnet_count = 10;
    std::vector<double> scales;                     // empty -> (1, 2, ..., Q)
    FirstLayer first_layer = FirstLayer::Fourier;
    uint64_t init_seed = 1;

    void validate() const;
    std::vector<double> effective_scales() const;
    bool operator==(const NetworkConfig&) const = default;
};

/// Flat-parameter layout of one subnetwork; all subnets share it.
struct ParamLayout {
    struct Layer {
        int in = 0;
        int out = 0;            // rows of W; Fourier first layer has out = width/2 frequencies
        bool has_bias = false;
        size_t w_offset = 0;    // within the subnet block, row-major out x in
        size_t b_offset = 0;
    };

    std::vector<Layer> layers;  // first, hidden..., output (out = 1)
    size_t per_subnet = 0;

    static ParamLayout make(const NetworkConfig& config);
};

struct FfmNetwork {
    NetworkConfig config;
    ParamLayout layout;
    std::vector<double> params;

    size_t param_count() const { return params.size(); }

    /// Scalar output: mean over subnets of Fourier-first MLPs evaluated at a_i * z.
    double forward(std::span<const double> z) const;

    /// First-layer feature vector of one subnet (cos/sin halves for Fourier).
    std::vector<double> first_layer_features(int subnet, std::span<const double> z) const;
};

FfmNetwork init_network(const NetworkConfig& config);

/// GELU(x) = x * Phi(x) with Phi the standard normal CDF; returns value and
/// first/second derivatives.
struct GeluValue {
    double value = 0;
    double d1 = 0;
    double d2 = 0;
};
GeluValue gelu_with_derivatives(double x);

/// Internal: adds the third derivative, needed by parameter backpropagation.
struct GeluDerivs {
    double value = 0;
    double d1 = 0;
    double d2 = 0;
    double d3 = 0;
};
GeluDerivs gelu_full(double x);

/// Versioned text checkpoint; parameters stored as hex floats and round-trip
/// bit-exactly. The optimizer/rng sections are optional (training state).
struct Checkpoint {
    FfmNetwork net;
    int epoch = 0;
    uint64_t train_seed = 0;
    std::string problem;
    std::string normalization;
    // optional training state
    bool has_train_state = false;
    int adam_step = 0;
    std::vector<double> adam_m;
    std::vector<double> adam_v;
    std::string rng_state;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace wavepinn
