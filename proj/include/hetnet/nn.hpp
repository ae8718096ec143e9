#pragma once

#include "hetnet/common.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace hetnet::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Layer widths of a dueling Q-network. The trunk feeds two heads of equal
/// hidden widths: the value head ends in one unit, the advantage head in
/// `actions` units.
struct NetworkShape {
    int input = 0;
    int actions = 0;
    std::vector<int> trunk{300, 300, 300};
    std::vector<int> head{300, 150};

    /// Four features per neighbor slot, one action per slot.
    static NetworkShape for_neighbors(int neighbors) {
        NetworkShape s;
        s.input = 4 * neighbors;
        s.actions = neighbors;
        return s;
    }

    friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// y = W x + b, column-batched: x is (in x batch).
template <typename Scalar>
struct DenseLayer {
    Matrix<Scalar> weight; // out x in
    Vector<Scalar> bias;

    int inputs() const { return static_cast<int>(weight.cols()); }
    int outputs() const { return static_cast<int>(weight.rows()); }
    Eigen::Index parameter_count() const { return weight.size() + bias.size(); }
};

/// Dueling Q-network Q = V + A - mean(A). Layers are stored flat in the order
/// trunk, value head, advantage head; the last layer of each head is linear.
template <typename Scalar>
class QNetwork {
public:
    using MatrixType = Matrix<Scalar>;
    using VectorType = Vector<Scalar>;

    QNetwork() = default;

    /// All parameters zero.
    explicit QNetwork(NetworkShape shape) : shape_(std::move(shape)) {
        if (shape_.input < 1 || shape_.actions < 1 || shape_.trunk.empty())
            throw Error("network shape needs positive input/action widths and a trunk");
        int in = shape_.input;
        for (int w : shape_.trunk) {
            add_layer(in, w);
            in = w;
        }
        const int trunk_out = in;
        for (int out_width : {1, shape_.actions}) {
            in = trunk_out;
            for (int w : shape_.head) {
                add_layer(in, w);
                in = w;
            }
            add_layer(in, out_width);
        }
    }

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
    static QNetwork initialized(const NetworkShape& shape, std::uint64_t seed) {
        QNetwork net(shape);
        std::mt19937_64 rng(seed);
        for (auto& layer : net.layers_) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs()));
            std::uniform_real_distribution<double> u(-bound, bound);
            for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = static_cast<Scalar>(u(rng));
            for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = static_cast<Scalar>(u(rng));
        }
        return net;
    }

    const NetworkShape& shape() const { return shape_; }
    int input_size() const { return shape_.input; }
    int num_actions() const { return shape_.actions; }

    std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
    const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }

    int trunk_depth() const { return static_cast<int>(shape_.trunk.size()); }
    int head_depth() const { return static_cast<int>(shape_.head.size()) + 1; }
    int value_begin() const { return trunk_depth(); }
    int advantage_begin() const { return trunk_depth() + head_depth(); }
    DenseLayer<Scalar>& value_output() { return layers_[static_cast<std::size_t>(advantage_begin() - 1)]; }
    DenseLayer<Scalar>& advantage_output() { return layers_.back(); }

    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (const auto& l : layers_) n += l.parameter_count();
        return n;
    }

    /// Same shape, all parameters zero.
    QNetwork zeros_like() const { return QNetwork(shape_); }

    template <typename NewScalar>
    QNetwork<NewScalar> cast() const {
        QNetwork<NewScalar> out(shape_);
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            out.layers()[i].weight = layers_[i].weight.template cast<NewScalar>();
            out.layers()[i].bias = layers_[i].bias.template cast<NewScalar>();
        }
        return out;
    }

    /// Visits every parameter tensor (weight, then bias, per layer) in order.
    template <typename F>
    void for_each_tensor(F&& f) {
        for (auto& l : layers_) {
            f(l.weight.data(), l.weight.size());
            f(l.bias.data(), l.bias.size());
        }
    }
    template <typename F>
    void for_each_tensor(F&& f) const {
        for (const auto& l : layers_) {
            f(l.weight.data(), l.weight.size());
            f(l.bias.data(), l.bias.size());
        }
    }

    bool all_finite() const {
        bool ok = true;
        for_each_tensor([&](const Scalar* p, Eigen::Index n) {
            ok = ok && Eigen::Map<const VectorType>(p, n).allFinite();
        });
        return ok;
    }

private:
    void add_layer(int in, int out) {
        layers_.push_back({MatrixType::Zero(out, in), VectorType::Zero(out)});
    }

    NetworkShape shape_;
    std::vector<DenseLayer<Scalar>> layers_;
};

/// Activations kept for backpropagation. inputs[l] is the input of layer l.
template <typename Scalar>
struct ForwardCache {
    std::vector<Matrix<Scalar>> inputs;
    Matrix<Scalar> value;     // 1 x batch
    Matrix<Scalar> advantage; // actions x batch
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> affine(const DenseLayer<Scalar>& layer, const Matrix<Scalar>& x) {
    Matrix<Scalar> z(layer.outputs(), x.cols());
    z.noalias() = layer.weight * x;
    z.colwise() += layer.bias;
    return z;
}

template <typename Scalar>
Matrix<Scalar> run_stack(const QNetwork<Scalar>& net, int begin, int end, Matrix<Scalar> h, ForwardCache<Scalar>* cache) {
    for (int l = begin; l < end; ++l) {
        const auto& layer = net.layers()[static_cast<std::size_t>(l)];
        if (cache) cache->inputs[static_cast<std::size_t>(l)] = h;
        h = affine(layer, h);
        if (l + 1 < end || l < net.trunk_depth()) h = h.cwiseMax(Scalar(0));
    }
    return h;
}

} // namespace detail

/// Q-values for a column batch of states: returns (actions x batch).
template <typename Scalar>
Matrix<Scalar> forward(const QNetwork<Scalar>& net,
                       const std::type_identity_t<Eigen::Ref<const Matrix<Scalar>>>& states,
                       ForwardCache<Scalar>* cache = nullptr) {
    if (states.rows() != net.input_size())
        throw Error("forward: expected input width " + std::to_string(net.input_size()) + ", got " +
                    std::to_string(states.rows()));
    if (cache) cache->inputs.assign(net.layers().size(), Matrix<Scalar>());
    Matrix<Scalar> trunk = detail::run_stack(net, 0, net.trunk_depth(), Matrix<Scalar>(states), cache);
    Matrix<Scalar> value = detail::run_stack(net, net.value_begin(), net.advantage_begin(), trunk, cache);
    Matrix<Scalar> advantage =
        detail::run_stack(net, net.advantage_begin(), static_cast<int>(net.layers().size()), trunk, cache);
    Matrix<Scalar> q = advantage.rowwise() - advantage.colwise().mean();
    q.rowwise() += value.row(0);
    if (cache) {
        cache->value = std::move(value);
        cache->advantage = std::move(advantage);
    }
    return q;
}

/// Q-values for a single state.
template <typename Scalar>
Vector<Scalar> q_values(const QNetwork<Scalar>& net, const std::type_identity_t<Vector<Scalar>>& state) {
    const Matrix<Scalar> q = forward(net, Matrix<Scalar>(state));
    return q.col(0);
}

/// One regression sample per column of `states`.
template <typename Scalar>
struct Batch {
    Matrix<Scalar> states;    // input x N
    std::vector<int> actions; // taken slot per sample
    Vector<Scalar> targets;   // regression target for Q[action]
    std::vector<int> valid;   // unmasked slot count per sample; empty = all valid

    Eigen::Index size() const { return states.cols(); }
};

template <typename Scalar>
struct LossAndGradients {
    Scalar loss = 0;
    QNetwork<Scalar> gradients;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> backprop_stack(const QNetwork<Scalar>& net, QNetwork<Scalar>& grads, const ForwardCache<Scalar>& cache,
                              int begin, int end, Matrix<Scalar> delta) {
    for (int l = end - 1; l >= begin; --l) {
        const auto idx = static_cast<std::size_t>(l);
        const auto& input = cache.inputs[idx];
        grads.layers()[idx].weight.noalias() += delta * input.transpose();
        grads.layers()[idx].bias += delta.rowwise().sum();
        Matrix<Scalar> upstream(input.rows(), input.cols());
        upstream.noalias() = net.layers()[idx].weight.transpose() * delta;
        // Every layer input past the raw states is a ReLU output.
        if (l > 0) upstream = (input.array() > Scalar(0)).select(upstream, Scalar(0));
        delta = std::move(upstream);
    }
    return delta;
}

} // namespace detail

/// Mean squared error between Q[action] and target over the batch, with
/// analytic gradients for every parameter.
template <typename Scalar>
LossAndGradients<Scalar> loss_and_gradients(const QNetwork<Scalar>& net, const Batch<Scalar>& batch) {
    const auto n = batch.size();
    if (n < 1) throw Error("loss_and_gradients: empty batch");
    if (static_cast<Eigen::Index>(batch.actions.size()) != n || batch.targets.size() != n)
        throw Error("loss_and_gradients: batch arrays disagree in length");
    if (!batch.valid.empty() && static_cast<Eigen::Index>(batch.valid.size()) != n)
        throw Error("loss_and_gradients: valid-slot array disagrees in length");
    for (Eigen::Index i = 0; i < n; ++i) {
        const int a = batch.actions[static_cast<std::size_t>(i)];
        const int limit = batch.valid.empty() ? net.num_actions() : batch.valid[static_cast<std::size_t>(i)];
        if (a < 0 || a >= limit || a >= net.num_actions())
            throw Error("loss_and_gradients: sample " + std::to_string(i) + " takes masked action " + std::to_string(a));
    }

    ForwardCache<Scalar> cache;
    const Matrix<Scalar> q = forward(net, batch.states, &cache);

    Matrix<Scalar> dq = Matrix<Scalar>::Zero(q.rows(), q.cols());
    Scalar loss = 0;
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int a = batch.actions[static_cast<std::size_t>(i)];
        const Scalar err = q(a, i) - batch.targets[i];
        loss += err * err;
        dq(a, i) = Scalar(2) * err * inv_n;
    }
    loss *= inv_n;

    LossAndGradients<Scalar> out{loss, net.zeros_like()};
    const Matrix<Scalar> d_value = dq.colwise().sum();
    const Matrix<Scalar> d_adv = dq.rowwise() - dq.colwise().mean();
    const int end = static_cast<int>(net.layers().size());
    Matrix<Scalar> d_trunk =
        detail::backprop_stack(net, out.gradients, cache, net.value_begin(), net.advantage_begin(), d_value);
    d_trunk += detail::backprop_stack(net, out.gradients, cache, net.advantage_begin(), end, d_adv);
    // The trunk output is itself a ReLU output, already masked by the head
    // layers' backprop above.
    detail::backprop_stack(net, out.gradients, cache, 0, net.trunk_depth(), std::move(d_trunk));
    return out;
}

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam moment accumulators mirroring a network's parameters.
template <typename Scalar>
class Adam {
public:
    Adam() = default;
    Adam(const QNetwork<Scalar>& net, AdamConfig config)
        : config_(config), first_(net.zeros_like()), second_(net.zeros_like()) {}

    const AdamConfig& config() const { return config_; }
    std::int64_t steps() const { return steps_; }

    /// Applies one update in place. Throws, leaving `net` untouched, if any
    /// gradient entry is not finite.
    void step(QNetwork<Scalar>& net, const QNetwork<Scalar>& grads) {
        Eigen::Index flat = 0;
        grads.for_each_tensor([&](const Scalar* g, Eigen::Index n) {
            for (Eigen::Index i = 0; i < n; ++i, ++flat)
                if (!std::isfinite(static_cast<double>(g[i])))
                    throw Error("non-finite gradient at parameter index " + std::to_string(flat));
        });

        ++steps_;
        const double t = static_cast<double>(steps_);
        const auto b1 = static_cast<Scalar>(config_.beta1);
        const auto b2 = static_cast<Scalar>(config_.beta2);
        const auto lr = static_cast<Scalar>(config_.learning_rate * std::sqrt(1.0 - std::pow(config_.beta2, t)) /
                                            (1.0 - std::pow(config_.beta1, t)));
        const auto eps = static_cast<Scalar>(config_.epsilon);

        auto& layers = net.layers();
        for (std::size_t l = 0; l < layers.size(); ++l) {
            update(layers[l].weight, grads.layers()[l].weight, first_.layers()[l].weight, second_.layers()[l].weight,
                   b1, b2, lr, eps);
            update(layers[l].bias, grads.layers()[l].bias, first_.layers()[l].bias, second_.layers()[l].bias, b1, b2,
                   lr, eps);
        }
    }

private:
    template <typename Tensor>
    static void update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, Scalar b1, Scalar b2, Scalar lr,
                       Scalar eps) {
        m = b1 * m + (Scalar(1) - b1) * grad;
        v = b2 * v + (Scalar(1) - b2) * grad.cwiseAbs2();
        param.array() -= lr * m.array() / (v.array().sqrt() + eps);
    }

    AdamConfig config_;
    QNetwork<Scalar> first_;
    QNetwork<Scalar> second_;
    std::int64_t steps_ = 0;
};

// Checkpoint container: "HNQN" magic, format version, architecture (input,
// actions, trunk widths, head widths), then per layer rows, cols and the
// column-major weights followed by the bias, all parameters as float64.
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw Error("checkpoint truncated");
    return v;
}

inline void write_widths(std::ostream& out, const std::vector<int>& widths) {
    write_pod(out, static_cast<std::int32_t>(widths.size()));
    for (int w : widths) write_pod(out, static_cast<std::int32_t>(w));
}

inline std::vector<int> read_widths(std::istream& in) {
    const auto n = read_pod<std::int32_t>(in);
    if (n < 0 || n > 64) throw Error("checkpoint has an implausible layer count");
    std::vector<int> widths;
    for (std::int32_t i = 0; i < n; ++i) widths.push_back(read_pod<std::int32_t>(in));
    return widths;
}

} // namespace detail

template <typename Scalar>
void save_checkpoint(const QNetwork<Scalar>& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint: " + path.string());
    out.write("HNQN", 4);
    detail::write_pod(out, kCheckpointVersion);
    detail::write_pod(out, static_cast<std::int32_t>(net.shape().input));
    detail::write_pod(out, static_cast<std::int32_t>(net.shape().actions));
    detail::write_widths(out, net.shape().trunk);
    detail::write_widths(out, net.shape().head);
    for (const auto& layer : net.layers()) {
        detail::write_pod(out, static_cast<std::int32_t>(layer.weight.rows()));
        detail::write_pod(out, static_cast<std::int32_t>(layer.weight.cols()));
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
            detail::write_pod(out, static_cast<double>(layer.weight.data()[i]));
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) detail::write_pod(out, static_cast<double>(layer.bias[i]));
    }
    if (!out) throw Error("failed writing checkpoint: " + path.string());
}

/// Fails if the stored architecture differs from `expected` (when given).
template <typename Scalar>
QNetwork<Scalar> load_checkpoint(const std::filesystem::path& path, const NetworkShape* expected = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "HNQN", 4) != 0) throw Error("not a checkpoint file: " + path.string());
    const auto version = detail::read_pod<std::uint32_t>(in);
    if (version != kCheckpointVersion) throw Error("unsupported checkpoint version " + std::to_string(version));

    NetworkShape shape;
    shape.input = detail::read_pod<std::int32_t>(in);
    shape.actions = detail::read_pod<std::int32_t>(in);
    shape.trunk = detail::read_widths(in);
    shape.head = detail::read_widths(in);
    if (expected && !(shape == *expected)) throw Error("checkpoint shape mismatch");

    QNetwork<Scalar> net(shape);
    for (auto& layer : net.layers()) {
        const auto rows = detail::read_pod<std::int32_t>(in);
        const auto cols = detail::read_pod<std::int32_t>(in);
        if (rows != layer.weight.rows() || cols != layer.weight.cols()) throw Error("checkpoint shape mismatch");
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
            layer.weight.data()[i] = static_cast<Scalar>(detail::read_pod<double>(in));
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
            layer.bias[i] = static_cast<Scalar>(detail::read_pod<double>(in));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw Error("checkpoint has trailing data");
    return net;
}

} // namespace hetnet::nn
