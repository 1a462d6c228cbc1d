#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "uvireid/rng.hpp"
#include "uvireid/tape.hpp"
#include "uvireid/tensor.hpp"

namespace uvireid::diff {

enum class Activation { Linear, Relu, Tanh };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct Layer {
    Tensor weight;  // (out x in)
    Tensor bias;    // (out)
    Activation act = Activation::Linear;
};

struct ParamRef {
    std::string name;
    Tensor* tensor;
};

// Small fully-connected network. Parameter order is fixed at construction
// (layer0.weight, layer0.bias, layer1.weight, ...) and never changes.
class Network {
public:
    Network() = default;
    // dims = {in, h1, ..., out}; acts has one entry per layer.
    Network(const std::vector<int>& dims, const std::vector<Activation>& acts, Rng& rng);
    static Network identity(int dim);

    bool empty() const { return layers_.empty(); }
    int input_dim() const;
    int output_dim() const;
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    size_t parameter_count() const;
    std::vector<ParamRef> named_params();
    std::vector<const Tensor*> param_tensors() const;

    // Tape-free forward pass (used for feature extraction / evaluation).
    Tensor apply(std::span<const double> x) const;

    // Clamp every weight and bias into [-c, c] (WGAN critic clipping).
    void clamp_params(double c);

private:
    std::vector<Layer> layers_;
};

// Puts one leaf per parameter on a tape so repeated forward calls share
// leaves and gradients accumulate across a batch.
class TapedNet {
public:
    TapedNet(Tape& tape, const Network& net);
    Var operator()(Var x) const;
    const std::vector<Var>& param_vars() const { return params_; }
    // Gradients from a backward() result, aligned with Network::named_params.
    std::vector<Tensor> gradients(const std::vector<Tensor>& node_grads) const;

private:
    Tape* tape_;
    const Network* net_;
    std::vector<Var> params_;
};

// Checkpoint: text header "UVIREID-NET v1", then per network a role line and
// per-layer dims, followed by the raw little-endian float64 parameters.
void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, const Network*>>& nets);
std::map<std::string, Network> load_checkpoint(const std::filesystem::path& path);

}  // namespace uvireid::diff
