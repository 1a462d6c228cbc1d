#include "uvireid/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "uvireid/errors.hpp"

namespace uvireid::diff {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
    }
    return "linear";
}

Activation activation_from_string(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    throw DataError("unknown activation tag: " + s);
}

Network::Network(const std::vector<int>& dims, const std::vector<Activation>& acts, Rng& rng) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1)
        throw ContractError("Network: dims/acts mismatch");
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        int in = dims[l], out = dims[l + 1];
        if (in <= 0 || out <= 0) throw ContractError("Network: dimensions must be positive");
        Layer layer;
        layer.weight = Tensor({out, in});
        layer.bias = Tensor({out});
        layer.act = acts[l];
        double bound = std::sqrt(6.0 / (in + out));
        for (int i = 0; i < layer.weight.size(); ++i)
            layer.weight[i] = (2.0 * rng.uniform() - 1.0) * bound;
        layers_.push_back(std::move(layer));
    }
}

Network Network::identity(int dim) {
    Network net;
    Layer layer;
    layer.weight = Tensor({dim, dim});
    layer.bias = Tensor({dim});
    layer.act = Activation::Linear;
    for (int i = 0; i < dim; ++i) layer.weight[i * dim + i] = 1.0;
    net.layers_.push_back(std::move(layer));
    return net;
}

int Network::input_dim() const {
    if (layers_.empty()) throw ContractError("Network: empty");
    return layers_.front().weight.cols();
}

int Network::output_dim() const {
    if (layers_.empty()) throw ContractError("Network: empty");
    return layers_.back().weight.rows();
}

size_t Network::parameter_count() const {
    size_t n = 0;
    for (const Layer& l : layers_) n += static_cast<size_t>(l.weight.size() + l.bias.size());
    return n;
}

std::vector<ParamRef> Network::named_params() {
    std::vector<ParamRef> out;
    for (size_t l = 0; l < layers_.size(); ++l) {
        out.push_back({"layer" + std::to_string(l) + ".weight", &layers_[l].weight});
        out.push_back({"layer" + std::to_string(l) + ".bias", &layers_[l].bias});
    }
    return out;
}

std::vector<const Tensor*> Network::param_tensors() const {
    std::vector<const Tensor*> out;
    for (const Layer& l : layers_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

Tensor Network::apply(std::span<const double> x) const {
    if (layers_.empty()) throw ContractError("Network: empty");
    if (static_cast<int>(x.size()) != input_dim())
        throw ContractError("Network::apply: input dimension mismatch");
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (const Layer& l : layers_) {
        int rows = l.weight.rows(), cols = l.weight.cols();
        next.assign(static_cast<size_t>(rows), 0.0);
        for (int r = 0; r < rows; ++r) {
            double acc = 0.0;
            const double* wr = l.weight.data() + static_cast<size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) acc += wr[c] * cur[static_cast<size_t>(c)];
            acc += l.bias[r];
            switch (l.act) {
                case Activation::Linear: break;
                case Activation::Relu: acc = acc > 0.0 ? acc : 0.0; break;
                case Activation::Tanh: acc = std::tanh(acc); break;
            }
            next[static_cast<size_t>(r)] = acc;
        }
        cur.swap(next);
    }
    return Tensor::vector(std::move(cur));
}

void Network::clamp_params(double c) {
    for (Layer& l : layers_) {
        for (int i = 0; i < l.weight.size(); ++i)
            l.weight[i] = std::clamp(l.weight[i], -c, c);
        for (int i = 0; i < l.bias.size(); ++i)
            l.bias[i] = std::clamp(l.bias[i], -c, c);
    }
}

TapedNet::TapedNet(Tape& tape, const Network& net) : tape_(&tape), net_(&net) {
    for (const Layer& l : net.layers()) {
        params_.push_back(tape.input(l.weight));
        params_.push_back(tape.input(l.bias));
    }
}

Var TapedNet::operator()(Var x) const {
    Var cur = x;
    for (size_t l = 0; l < net_->layers().size(); ++l) {
        Var w = params_[2 * l];
        Var b = params_[2 * l + 1];
        cur = tape_->add(tape_->matvec(w, cur), b);
        switch (net_->layers()[l].act) {
            case Activation::Linear: break;
            case Activation::Relu: cur = tape_->relu(cur); break;
            case Activation::Tanh: cur = tape_->tanh(cur); break;
        }
    }
    return cur;
}

std::vector<Tensor> TapedNet::gradients(const std::vector<Tensor>& node_grads) const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (Var p : params_) out.push_back(tape_->gradient(node_grads, p));
    return out;
}

namespace {

void write_le_doubles(std::ostream& os, const Tensor& t) {
    for (int i = 0; i < t.size(); ++i) {
        uint64_t bits;
        double v = t[i];
        std::memcpy(&bits, &v, 8);
        unsigned char buf[8];
        for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
        os.write(reinterpret_cast<const char*>(buf), 8);
    }
}

void read_le_doubles(std::istream& is, Tensor& t) {
    for (int i = 0; i < t.size(); ++i) {
        unsigned char buf[8];
        is.read(reinterpret_cast<char*>(buf), 8);
        if (!is) throw DataError("checkpoint: truncated parameter block");
        uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<uint64_t>(buf[b]) << (8 * b);
        double v;
        std::memcpy(&v, &bits, 8);
        t[i] = v;
    }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, const Network*>>& nets) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
    os << "UVIREID-NET v1\n";
    for (const auto& [role, net] : nets) {
        os << "net " << role << " " << net->layers().size() << "\n";
        for (const Layer& l : net->layers())
            os << "layer " << to_string(l.act) << " " << l.weight.cols() << " "
               << l.weight.rows() << "\n";
        for (const Layer& l : net->layers()) {
            write_le_doubles(os, l.weight);
            write_le_doubles(os, l.bias);
        }
    }
    if (!os) throw DataError("checkpoint write failed: " + path.string());
}

std::map<std::string, Network> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path.string());
    std::string header;
    if (!std::getline(is, header) || header != "UVIREID-NET v1")
        throw DataError("checkpoint: bad header in " + path.string());
    std::map<std::string, Network> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::string tag, role;
        size_t nlayers = 0;
        {
            std::istringstream ls(line);
            if (!(ls >> tag >> role >> nlayers) || tag != "net")
                throw DataError("checkpoint: expected net line, got: " + line);
        }
        Network net;
        for (size_t l = 0; l < nlayers; ++l) {
            if (!std::getline(is, line)) throw DataError("checkpoint: truncated layer header");
            std::istringstream ls(line);
            std::string ltag, act;
            int in = 0, outdim = 0;
            if (!(ls >> ltag >> act >> in >> outdim) || ltag != "layer" || in <= 0 || outdim <= 0)
                throw DataError("checkpoint: bad layer line: " + line);
            Layer layer;
            layer.act = activation_from_string(act);
            layer.weight = Tensor({outdim, in});
            layer.bias = Tensor({outdim});
            net.layers().push_back(std::move(layer));
        }
        for (Layer& l : net.layers()) {
            read_le_doubles(is, l.weight);
            read_le_doubles(is, l.bias);
        }
        if (out.count(role)) throw DataError("checkpoint: duplicate role " + role);
        out.emplace(role, std::move(net));
    }
    return out;
}

}  // namespace uvireid::diff
