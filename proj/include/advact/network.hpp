#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "advact/activations.hpp"
#include "advact/adversarial.hpp"
#include "advact/error.hpp"
#include "advact/matrix.hpp"
#include "advact/rng.hpp"
#include "advact/split.hpp"
#include "advact/tape.hpp"

namespace advact {

enum class LayerKind { Dense, SplitLinear, BatchNorm, Activation, XiActivation };

enum class ActTag { Sigmoid, SigmoidTheta, Tanh, Gelu, Relu };

enum class PolicyMode { None, GA, SA };

inline std::string act_tag_name(ActTag t) {
    switch (t) {
        case ActTag::Sigmoid: return "sigmoid";
        case ActTag::SigmoidTheta: return "sigmoid_theta";
        case ActTag::Tanh: return "tanh";
        case ActTag::Gelu: return "gelu";
        case ActTag::Relu: return "relu";
    }
    return "?";
}

inline std::string policy_mode_name(PolicyMode m) {
    switch (m) {
        case PolicyMode::None: return "none";
        case PolicyMode::GA: return "ga";
        case PolicyMode::SA: return "sa";
    }
    return "?";
}

// Declarative layer description consumed by build_network.
struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    std::size_t width = 0;                       // output width (Dense / SplitLinear)
    ActTag activation = ActTag::Sigmoid;          // Activation / XiActivation layers
    SplitFormula formula = SplitFormula::Tanh4;   // SplitLinear layers
    int k = 4;                                    // SplitLinear branch count
    double alpha = 1.0;                           // SigmoidTheta lift
    bool bias = true;                             // Dense bias
};

// GA / SA alternation. The final activated layer always receives the
// small-gradient member of its pair (the member with the lower derivative
// range supremum); walking backward from there the members strictly
// alternate.
struct AlternationPolicy {
    PolicyMode mode = PolicyMode::None;
};

// ---------------------------------------------------------------------------
// Built layers.
// ---------------------------------------------------------------------------

struct DenseLayer {
    Matrix weight;  // in x out
    Matrix bias;    // 1 x out, empty when disabled
    bool has_bias = true;
};

struct SplitLinearLayer {
    std::vector<Matrix> weights;  // k branches, each in x width
    SplitFormula formula = SplitFormula::Tanh4;
    bool adversarial = false;     // xi counterpart of the recombination
    XiTanhParams xi_tanh;         // used when adversarial && formula != Gelu4
    XiGeluParams xi_gelu;         // used when adversarial && formula == Gelu4
    std::size_t singular_hits = 0;
};

struct BatchNormLayer {
    Matrix gamma, beta;           // 1 x width
    Matrix running_mean, running_var;
    double momentum = 0.1;
    double eps = 1e-5;
    bool stats_initialized = false;
};

struct ActivationLayer {
    ActTag tag = ActTag::Sigmoid;
    double alpha = 1.0;   // SigmoidTheta lift
    bool use_xi = false;  // adversarial member of the pair
};

using Layer = std::variant<DenseLayer, SplitLinearLayer, BatchNormLayer, ActivationLayer>;

inline std::string layer_tag(const DenseLayer&) { return "dense"; }
inline std::string layer_tag(const BatchNormLayer&) { return "batchnorm"; }
inline std::string layer_tag(const SplitLinearLayer& l) {
    return (l.adversarial ? "xi_" : "") + split_formula_name(l.formula);
}
inline std::string layer_tag(const ActivationLayer& l) {
    return (l.use_xi ? "xi_" : "") + act_tag_name(l.tag);
}

inline std::string layer_tag(const Layer& layer) {
    return std::visit([](const auto& l) { return layer_tag(l); }, layer);
}

// ---------------------------------------------------------------------------
// Forward bookkeeping.
// ---------------------------------------------------------------------------

// Binds a parameter living in the network to its leaf node on the tape of
// the current step, so the optimizer can read gradients back.
struct MatrixBinding {
    Matrix* host = nullptr;
    Value leaf;
};

struct ScalarBinding {
    TrainableScalar* host = nullptr;
    Value leaf;
};

// Pre-activation probe of one activated layer: the nodes whose values feed
// the nonlinearity (dense output for GA blocks, the k branch pre-activations
// for split layers).
struct Tap {
    std::size_t layer_index = 0;
    std::string tag;
    std::vector<Value> nodes;
};

struct ForwardRecord {
    Value output;
    std::vector<MatrixBinding> matrices;
    std::vector<ScalarBinding> scalars;
    std::vector<Tap> taps;
};

// ---------------------------------------------------------------------------
// Network.
// ---------------------------------------------------------------------------

class Network {
  public:
    Network() = default;
    Network(std::size_t input_dim, std::vector<Layer> layers, std::uint64_t seed,
            PolicyMode mode)
        : input_dim_(input_dim), layers_(std::move(layers)), seed_(seed), mode_(mode) {}

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return output_dim_; }
    std::uint64_t seed() const { return seed_; }
    PolicyMode mode() const { return mode_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    double clamp_bound() const { return clamp_bound_; }
    void set_clamp_bound(double b) { clamp_bound_ = b; }  // <= 0 disables

    void set_output_dim(std::size_t d) { output_dim_ = d; }

    // All trainable scalars owned by adversarial split layers.
    std::vector<TrainableScalar*> trainable_scalars() {
        std::vector<TrainableScalar*> out;
        for (auto& layer : layers_) {
            auto* s = std::get_if<SplitLinearLayer>(&layer);
            if (!s || !s->adversarial) continue;
            if (s->formula == SplitFormula::Gelu4) {
                auto& p = s->xi_gelu;
                out.push_back(&p.alpha[0]);
                out.push_back(&p.alpha[1]);
                out.push_back(&p.alpha[3]);
                out.push_back(&p.alpha[4]);
                out.push_back(&p.delta1);
                out.push_back(&p.delta2);
                out.push_back(&p.delta3);
                out.push_back(&p.beta);
            } else {
                for (auto& a : s->xi_tanh.alpha) out.push_back(&a);
            }
        }
        return out;
    }

    // Exact count of weight, bias, batch-norm and trainable-scalar parameters.
    std::size_t count_parameters() {
        std::size_t n = 0;
        for (auto& layer : layers_) {
            std::visit(
                [&n](auto& l) {
                    using T = std::decay_t<decltype(l)>;
                    if constexpr (std::is_same_v<T, DenseLayer>) {
                        n += l.weight.size() + l.bias.size();
                    } else if constexpr (std::is_same_v<T, SplitLinearLayer>) {
                        for (const auto& w : l.weights) n += w.size();
                    } else if constexpr (std::is_same_v<T, BatchNormLayer>) {
                        n += l.gamma.size() + l.beta.size();
                    }
                },
                layer);
        }
        n += trainable_scalars().size();
        return n;
    }

    // Runs the network on `x`, recording every operation on `tape`.
    // In training mode batch-norm consumes batch statistics and updates its
    // running averages; in eval mode it standardizes with the running stats.
    ForwardRecord forward(Tape& tape, const Matrix& x, bool training) {
        if (x.cols() != input_dim_)
            throw ShapeError("network input width " + std::to_string(x.cols()) +
                             ", expected " + std::to_string(input_dim_));
        ForwardRecord rec;
        Value cur = tape.leaf(x, false, "input");
        Value pre_activation = cur;  // most recent linear-map output
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            auto& layer = layers_[li];
            if (auto* d = std::get_if<DenseLayer>(&layer)) {
                Value w = tape.leaf(d->weight, true, layer_name(li, "dense.W"));
                rec.matrices.push_back({&d->weight, w});
                cur = tape.matmul(cur, w);
                if (d->has_bias) {
                    Value b = tape.leaf(d->bias, true, layer_name(li, "dense.b"));
                    rec.matrices.push_back({&d->bias, b});
                    cur = tape.add_rows(cur, b);
                }
                pre_activation = cur;
            } else if (auto* s = std::get_if<SplitLinearLayer>(&layer)) {
                cur = forward_split(tape, rec, *s, cur, li);
                pre_activation = cur;
            } else if (auto* bn = std::get_if<BatchNormLayer>(&layer)) {
                cur = forward_batchnorm(tape, rec, *bn, cur, training, li);
            } else if (auto* a = std::get_if<ActivationLayer>(&layer)) {
                rec.taps.push_back({li, layer_tag(layer), {pre_activation}});
                cur = forward_activation(tape, *a, cur, li);
            }
        }
        rec.output = cur;
        return rec;
    }

    std::string layer_name(std::size_t index, const std::string& what) const {
        return "layer" + std::to_string(index) + "." + what;
    }

  private:
    Value forward_activation(Tape& tape, const ActivationLayer& a, Value cur,
                             std::size_t li) {
        const std::string name = layer_name(li, layer_tag(a));
        switch (a.tag) {
            case ActTag::Sigmoid: {
                GaPair p = make_sigmoid_pair();
                return a.use_xi ? tape.apply(cur, p.xi, p.xi_prime, name)
                                : tape.apply(cur, p.f, p.f_prime, name);
            }
            case ActTag::SigmoidTheta: {
                GaPair p = make_sigmoid_theta_pair(a.alpha);
                return a.use_xi ? tape.apply(cur, p.xi, p.xi_prime, name)
                                : tape.apply(cur, p.f, p.f_prime, name);
            }
            case ActTag::Tanh:
                if (a.use_xi) throw SpecError("tanh has no global adversarial member");
                return tape.apply(
                    cur, [](double v) { return tanh_act(v); },
                    [](double v) { return tanh_act_prime(v); }, name);
            case ActTag::Gelu:
                if (a.use_xi) throw SpecError("gelu has no global adversarial member");
                return tape.apply(
                    cur, [](double v) { return gelu_tanh_approx(v); },
                    [](double v) { return gelu_tanh_approx_prime(v); }, name);
            case ActTag::Relu:
                if (a.use_xi) throw SpecError("relu has no global adversarial member");
                return tape.apply(
                    cur, [](double v) { return relu(v); },
                    [](double v) { return relu_prime(v); }, name);
        }
        throw SpecError("unknown activation tag");
    }

    Value forward_split(Tape& tape, ForwardRecord& rec, SplitLinearLayer& s, Value cur,
                        std::size_t li) {
        const int k = static_cast<int>(s.weights.size());
        std::vector<Value> chis;
        std::vector<std::size_t> parents;
        chis.reserve(k);
        for (int b = 0; b < k; ++b) {
            Value w = tape.leaf(s.weights[b], true,
                                layer_name(li, "split.W" + std::to_string(b + 1)));
            rec.matrices.push_back({&s.weights[b], w});
            Value chi = tape.matmul(cur, w);
            chis.push_back(chi);
            parents.push_back(chi.index);
        }
        rec.taps.push_back({li, layer_tag(s), chis});
        const std::string name = layer_name(li, layer_tag(s));
        if (!s.adversarial) return recombine_plain(tape, s, chis, parents, name);
        if (s.formula == SplitFormula::Gelu4)
            return recombine_xi_gelu(tape, rec, s, chis, parents, name, li);
        return recombine_xi_tanh(tape, rec, s, chis, parents, name, li);
    }

    Value recombine_plain(Tape& tape, const SplitLinearLayer& s,
                          const std::vector<Value>& chis, std::vector<std::size_t> parents,
                          const std::string& name) {
        const std::size_t m = chis[0].rows(), w = chis[0].cols();
        Matrix out(m, w);
        const SplitFormula formula = s.formula;
        for (std::size_t e = 0; e < m * w; ++e) {
            switch (formula) {
                case SplitFormula::Tanh2:
                    out.data()[e] = tanh_split2(chis[0].val().data()[e], chis[1].val().data()[e]);
                    break;
                case SplitFormula::Tanh4:
                    out.data()[e] = tanh_split4(chis[0].val().data()[e], chis[1].val().data()[e],
                                                chis[2].val().data()[e], chis[3].val().data()[e]);
                    break;
                case SplitFormula::Gelu4:
                    out.data()[e] = gelu_split4(chis[0].val().data()[e], chis[1].val().data()[e],
                                                chis[2].val().data()[e], chis[3].val().data()[e]);
                    break;
            }
        }
        auto chi_idx = parents;
        return tape.custom(
            "recombine", name, std::move(parents), std::move(out),
            [formula, chi_idx](Tape& t, const TapeNode& n) {
                const std::size_t count = n.value.size();
                const int arity = split_arity(formula);
                std::vector<Matrix> grads;
                grads.reserve(arity);
                for (int b = 0; b < arity; ++b)
                    grads.emplace_back(n.value.rows(), n.value.cols());
                for (std::size_t e = 0; e < count; ++e) {
                    const double g = n.grad.data()[e];
                    if (formula == SplitFormula::Tanh2) {
                        auto p = tanh_split2_partials(t.node(chi_idx[0]).value.data()[e],
                                                      t.node(chi_idx[1]).value.data()[e]);
                        grads[0].data()[e] = g * p[0];
                        grads[1].data()[e] = g * p[1];
                    } else {
                        std::array<double, 4> p{};
                        const double c1 = t.node(chi_idx[0]).value.data()[e];
                        const double c2 = t.node(chi_idx[1]).value.data()[e];
                        const double c3 = t.node(chi_idx[2]).value.data()[e];
                        const double c4 = t.node(chi_idx[3]).value.data()[e];
                        p = (formula == SplitFormula::Tanh4) ? tanh_split4_partials(c1, c2, c3, c4)
                                                             : gelu_split4_partials(c1, c2, c3, c4);
                        for (int b = 0; b < 4; ++b) grads[b].data()[e] = g * p[b];
                    }
                }
                for (int b = 0; b < arity; ++b) t.accumulate(chi_idx[b], grads[b]);
            });
    }

    Value recombine_xi_tanh(Tape& tape, ForwardRecord& rec, SplitLinearLayer& s,
                            const std::vector<Value>& chis, std::vector<std::size_t> parents,
                            const std::string& name, std::size_t li) {
        XiTanhParams* params = &s.xi_tanh;
        std::array<std::size_t, 12> alpha_idx{};
        for (int i = 0; i < 12; ++i) {
            Value leaf = tape.leaf(Matrix::scalar(params->alpha[i].value), true,
                                   layer_name(li, params->alpha[i].name));
            rec.scalars.push_back({&params->alpha[i], leaf});
            alpha_idx[i] = leaf.index;
            parents.push_back(leaf.index);
        }
        const std::size_t m = chis[0].rows(), w = chis[0].cols();
        Matrix out(m, w);
        for (std::size_t e = 0; e < m * w; ++e)
            out.data()[e] = xi_tanh_forward(chis[0].val().data()[e], chis[1].val().data()[e],
                                            chis[2].val().data()[e], chis[3].val().data()[e],
                                            *params);
        std::array<std::size_t, 4> chi_idx{parents[0], parents[1], parents[2], parents[3]};
        const double bound = clamp_bound_;
        return tape.custom(
            "xi_tanh", name, std::move(parents), std::move(out),
            [params, chi_idx, alpha_idx, bound](Tape& t, const TapeNode& n) {
                const std::size_t count = n.value.size();
                std::array<Matrix, 4> cg;
                for (auto& g : cg) g = Matrix(n.value.rows(), n.value.cols());
                std::array<double, 12> ag{};
                for (std::size_t e = 0; e < count; ++e) {
                    const double g = n.grad.data()[e];
                    const XiTanhGrad d = xi_tanh_forward_grad(
                        t.node(chi_idx[0]).value.data()[e], t.node(chi_idx[1]).value.data()[e],
                        t.node(chi_idx[2]).value.data()[e], t.node(chi_idx[3]).value.data()[e],
                        *params);
                    for (int b = 0; b < 4; ++b) cg[b].data()[e] = g * d.chi[b];
                    for (int i = 0; i < 12; ++i) ag[i] += g * d.alpha[i];
                }
                for (int b = 0; b < 4; ++b) {
                    if (bound > 0.0 && std::isfinite(bound))
                        cg[b] = clamp_gradient(cg[b], bound);
                    t.accumulate(chi_idx[b], cg[b]);
                }
                for (int i = 0; i < 12; ++i)
                    t.accumulate(alpha_idx[i], Matrix::scalar(ag[i]));
            });
    }

    Value recombine_xi_gelu(Tape& tape, ForwardRecord& rec, SplitLinearLayer& s,
                            const std::vector<Value>& chis, std::vector<std::size_t> parents,
                            const std::string& name, std::size_t li) {
        XiGeluParams* params = &s.xi_gelu;
        std::array<TrainableScalar*, 8> hosts = {
            &params->alpha[0], &params->alpha[1], &params->alpha[3], &params->alpha[4],
            &params->delta1,   &params->delta2,   &params->delta3,   &params->beta};
        std::array<std::size_t, 8> scalar_idx{};
        for (int i = 0; i < 8; ++i) {
            Value leaf = tape.leaf(Matrix::scalar(hosts[i]->value), true,
                                   layer_name(li, hosts[i]->name));
            rec.scalars.push_back({hosts[i], leaf});
            scalar_idx[i] = leaf.index;
            parents.push_back(leaf.index);
        }
        const std::size_t m = chis[0].rows(), w = chis[0].cols();
        Matrix out(m, w);
        for (std::size_t e = 0; e < m * w; ++e) {
            const double chibar = (chis[1].val().data()[e] + chis[2].val().data()[e] +
                                   chis[3].val().data()[e]) / 3.0;
            out.data()[e] = xi_gelu_forward(chis[0].val().data()[e], chibar, *params);
        }
        std::array<std::size_t, 4> chi_idx{parents[0], parents[1], parents[2], parents[3]};
        const double bound = clamp_bound_;
        return tape.custom(
            "xi_gelu", name, std::move(parents), std::move(out),
            [params, chi_idx, scalar_idx, bound](Tape& t, const TapeNode& n) {
                const std::size_t count = n.value.size();
                std::array<Matrix, 4> cg;
                for (auto& g : cg) g = Matrix(n.value.rows(), n.value.cols());
                std::array<double, 8> sg{};
                for (std::size_t e = 0; e < count; ++e) {
                    const double g = n.grad.data()[e];
                    const double chibar =
                        (t.node(chi_idx[1]).value.data()[e] + t.node(chi_idx[2]).value.data()[e] +
                         t.node(chi_idx[3]).value.data()[e]) / 3.0;
                    const XiGeluGrad d =
                        xi_gelu_forward_grad(t.node(chi_idx[0]).value.data()[e], chibar, *params);
                    cg[0].data()[e] = g * d.chi1;
                    const double gbar = g * d.chibar / 3.0;
                    cg[1].data()[e] = gbar;
                    cg[2].data()[e] = gbar;
                    cg[3].data()[e] = gbar;
                    sg[0] += g * d.a1;
                    sg[1] += g * d.a2;
                    sg[2] += g * d.a4;
                    sg[3] += g * d.a5;
                    sg[4] += g * d.d1;
                    sg[5] += g * d.d2;
                    sg[6] += g * d.d3;
                    sg[7] += g * d.beta;
                }
                for (int b = 0; b < 4; ++b) {
                    if (bound > 0.0 && std::isfinite(bound))
                        cg[b] = clamp_gradient(cg[b], bound);
                    t.accumulate(chi_idx[b], cg[b]);
                }
                for (int i = 0; i < 8; ++i)
                    t.accumulate(scalar_idx[i], Matrix::scalar(sg[i]));
            });
    }

    Value forward_batchnorm(Tape& tape, ForwardRecord& rec, BatchNormLayer& bn, Value cur,
                            bool training, std::size_t li) {
        if (training && cur.rows() < 2)
            throw ContractError("batchnorm: training requires batch size >= 2");
        Value gamma = tape.leaf(bn.gamma, true, layer_name(li, "bn.gamma"));
        Value beta = tape.leaf(bn.beta, true, layer_name(li, "bn.beta"));
        rec.matrices.push_back({&bn.gamma, gamma});
        rec.matrices.push_back({&bn.beta, beta});
        // Leaf pushes above may reallocate the tape, so bind the input only now.
        const Matrix& x = cur.val();
        const std::size_t m = x.rows(), c = x.cols();

        Matrix mean(1, c), var(1, c);
        if (training) {
            for (std::size_t j = 0; j < c; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < m; ++i) s += x(i, j);
                mean(0, j) = s / static_cast<double>(m);
            }
            for (std::size_t j = 0; j < c; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double d = x(i, j) - mean(0, j);
                    s += d * d;
                }
                var(0, j) = s / static_cast<double>(m);
            }
            // Running averages keep the unbiased variance, eval consumes them.
            const double unbias = static_cast<double>(m) / static_cast<double>(m - 1);
            if (!bn.stats_initialized) {
                bn.running_mean = mean;
                bn.running_var = scale(var, unbias);
                bn.stats_initialized = true;
            } else {
                for (std::size_t j = 0; j < c; ++j) {
                    bn.running_mean(0, j) = (1.0 - bn.momentum) * bn.running_mean(0, j) +
                                            bn.momentum * mean(0, j);
                    bn.running_var(0, j) = (1.0 - bn.momentum) * bn.running_var(0, j) +
                                           bn.momentum * var(0, j) * unbias;
                }
            }
        } else {
            mean = bn.stats_initialized ? bn.running_mean : Matrix(1, c);
            var = bn.stats_initialized ? bn.running_var : Matrix(1, c, 1.0);
        }

        Matrix xhat(m, c), out(m, c);
        Matrix inv_std(1, c);
        const double eps = bn.eps;
        for (std::size_t j = 0; j < c; ++j) inv_std(0, j) = 1.0 / std::sqrt(var(0, j) + eps);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < c; ++j) {
                xhat(i, j) = (x(i, j) - mean(0, j)) * inv_std(0, j);
                out(i, j) = bn.gamma(0, j) * xhat(i, j) + bn.beta(0, j);
            }

        const std::size_t ix = cur.index, ig = gamma.index, ib = beta.index;
        const std::string name = layer_name(li, "batchnorm");
        return tape.custom(
            "batchnorm", name, {ix, ig, ib}, std::move(out),
            [ix, ig, ib, xhat, inv_std, training, m, c](Tape& t, const TapeNode& n) {
                const Matrix& gam = t.node(ig).value;
                Matrix dgamma(1, c), dbeta(1, c);
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < c; ++j) {
                        dgamma(0, j) += n.grad(i, j) * xhat(i, j);
                        dbeta(0, j) += n.grad(i, j);
                    }
                Matrix dx(m, c);
                if (training) {
                    // dx = g/std * (dy - mean(dy) - xhat * mean(dy*xhat))
                    const double inv_m = 1.0 / static_cast<double>(m);
                    for (std::size_t j = 0; j < c; ++j) {
                        const double mean_dy = dbeta(0, j) * inv_m;
                        const double mean_dyx = dgamma(0, j) * inv_m;
                        const double a = gam(0, j) * inv_std(0, j);
                        for (std::size_t i = 0; i < m; ++i)
                            dx(i, j) = a * (n.grad(i, j) - mean_dy - xhat(i, j) * mean_dyx);
                    }
                } else {
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < c; ++j)
                            dx(i, j) = n.grad(i, j) * gam(0, j) * inv_std(0, j);
                }
                t.accumulate(ix, dx);
                t.accumulate(ig, dgamma);
                t.accumulate(ib, dbeta);
            });
    }

    std::size_t input_dim_ = 0;
    std::size_t output_dim_ = 0;
    std::vector<Layer> layers_;
    std::uint64_t seed_ = 0;
    PolicyMode mode_ = PolicyMode::None;
    double clamp_bound_ = 0.0;  // disabled unless configured
};

// ---------------------------------------------------------------------------
// build_network.
// ---------------------------------------------------------------------------

inline Matrix he_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    Matrix w(fan_in, fan_out);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
    return w;
}

// Assigns pair members to the activated layers: the last one gets the
// small-gradient member, then members strictly alternate walking backward.
// Returns use_xi per activated layer.
inline std::vector<bool> alternation_assignment(std::size_t activated_count,
                                                bool xi_is_small) {
    std::vector<bool> use_xi(activated_count, false);
    for (std::size_t r = 0; r < activated_count; ++r) {
        const bool small_member = (r % 2 == 0);  // r = 0 is the final layer
        const bool xi = (small_member == xi_is_small);
        use_xi[activated_count - 1 - r] = xi;
    }
    return use_xi;
}

inline bool ga_capable(ActTag t) { return t == ActTag::Sigmoid || t == ActTag::SigmoidTheta; }

inline Network build_network(std::size_t input_dim, const std::vector<LayerSpec>& spec,
                             const AlternationPolicy& policy, std::uint64_t seed) {
    if (spec.empty()) throw SpecError("build_network: empty layer spec");

    // Pass 1: width consistency and activated-layer census.
    std::size_t width = input_dim;
    std::vector<std::size_t> activated;  // indices into spec
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const LayerSpec& ls = spec[i];
        switch (ls.kind) {
            case LayerKind::Dense:
            case LayerKind::SplitLinear:
                if (ls.width == 0) throw SpecError("layer width must be positive");
                width = ls.width;
                if (ls.kind == LayerKind::SplitLinear) {
                    if (split_arity(ls.formula) != ls.k)
                        throw SpecError("split formula arity does not match k");
                    if (policy.mode == PolicyMode::SA) activated.push_back(i);
                }
                break;
            case LayerKind::BatchNorm:
                break;
            case LayerKind::Activation:
            case LayerKind::XiActivation:
                if (policy.mode == PolicyMode::GA) {
                    if (!ga_capable(ls.activation))
                        throw SpecError("GA policy requires a sigmoid-family activation");
                    activated.push_back(i);
                }
                break;
        }
    }
    if (policy.mode == PolicyMode::SA && activated.empty())
        throw SpecError("SA policy on a network with no split layers");
    if (policy.mode == PolicyMode::GA && activated.empty())
        throw SpecError("GA policy on a network with no activation layers");

    // Member assignment.
    std::vector<bool> use_xi;
    if (policy.mode == PolicyMode::GA) {
        const LayerSpec& first = spec[activated.front()];
        const GaPair pair = first.activation == ActTag::SigmoidTheta
                                ? make_sigmoid_theta_pair(first.alpha)
                                : make_sigmoid_pair();
        use_xi = alternation_assignment(activated.size(), pair.xi_is_small_member());
    } else if (policy.mode == PolicyMode::SA) {
        // The plain recombination is always the small member: the xi partials
        // are reciprocal and unbounded above.
        use_xi = alternation_assignment(activated.size(), false);
    }

    // Pass 2: materialize layers.
    std::vector<Layer> layers;
    layers.reserve(spec.size());
    width = input_dim;
    std::size_t activated_pos = 0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const LayerSpec& ls = spec[i];
        const bool is_activated =
            activated_pos < activated.size() && activated[activated_pos] == i;
        switch (ls.kind) {
            case LayerKind::Dense: {
                DenseLayer d;
                Rng rng = derive_stream(seed, stream_tag::kInit, i * 16);
                d.weight = he_uniform(width, ls.width, rng);
                d.has_bias = ls.bias;
                if (ls.bias) d.bias = Matrix(1, ls.width);
                layers.emplace_back(std::move(d));
                width = ls.width;
                break;
            }
            case LayerKind::SplitLinear: {
                SplitLinearLayer s;
                s.formula = ls.formula;
                s.adversarial = is_activated ? use_xi[activated_pos] : false;
                for (int b = 0; b < ls.k; ++b) {
                    Rng rng = derive_stream(seed, stream_tag::kInit, i * 16 + 1 + b);
                    s.weights.push_back(he_uniform(width, ls.width, rng));
                }
                layers.emplace_back(std::move(s));
                width = ls.width;
                if (is_activated) ++activated_pos;
                break;
            }
            case LayerKind::BatchNorm: {
                BatchNormLayer bn;
                bn.gamma = Matrix(1, width, 1.0);
                bn.beta = Matrix(1, width);
                bn.running_mean = Matrix(1, width);
                bn.running_var = Matrix(1, width, 1.0);
                layers.emplace_back(std::move(bn));
                break;
            }
            case LayerKind::Activation:
            case LayerKind::XiActivation: {
                ActivationLayer a;
                a.tag = ls.activation;
                a.alpha = ls.alpha;
                a.use_xi = ls.kind == LayerKind::XiActivation;
                if (is_activated) {
                    a.use_xi = use_xi[activated_pos];
                    ++activated_pos;
                }
                layers.emplace_back(a);
                break;
            }
        }
    }
    Network net(input_dim, std::move(layers), seed, policy.mode);
    net.set_output_dim(width);
    return net;
}

} // namespace advact
