#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "advact/activations.hpp"
#include "advact/error.hpp"
#include "advact/matrix.hpp"

namespace advact {

class Tape;

// One recorded operation. Parents always precede children in tape order, so
// a single reverse sweep visits every node after all of its consumers.
struct TapeNode {
    std::string op;                      // operation tag, used in error context
    std::string label;                   // layer / parameter name, may be empty
    std::vector<std::size_t> parents;
    Matrix value;
    Matrix grad;                         // lazily allocated by backward()
    bool requires_grad = false;
    bool grad_allocated = false;
    // Receives this node's grad, accumulates into parent grads via the tape.
    std::function<void(Tape&, const TapeNode&)> backprop;
};

// Handle to a node on a specific tape.
struct Value {
    Tape* tape = nullptr;
    std::size_t index = 0;

    const Matrix& val() const;
    const Matrix& grad() const;
    std::size_t rows() const { return val().rows(); }
    std::size_t cols() const { return val().cols(); }
};

// Define-by-run reverse-mode tape. Rebuilt every forward pass; owned by
// exactly one training step at a time. Gradient accumulation is additive:
// a node consumed twice receives the sum of both upstream contributions.
class Tape {
  public:
    explicit Tape(bool checked = false) : checked_(checked) {}

    bool checked() const { return checked_; }
    void set_checked(bool c) { checked_ = c; }

    std::size_t size() const { return nodes_.size(); }
    TapeNode& node(std::size_t i) { return nodes_[i]; }
    const TapeNode& node(std::size_t i) const { return nodes_[i]; }

    Value leaf(Matrix v, bool requires_grad = false, std::string label = {}) {
        return push("leaf", std::move(label), {}, std::move(v), requires_grad, nullptr);
    }

    // --- arithmetic ---------------------------------------------------------

    Value matmul(Value a, Value b) {
        Matrix out = advact::matmul(a.val(), b.val());
        const std::size_t ia = a.index, ib = b.index;
        return push("matmul", {}, {ia, ib}, std::move(out), true,
                    [ia, ib](Tape& t, const TapeNode& n) {
                        t.accumulate(ia, advact::matmul(n.grad, transpose(t.node(ib).value)));
                        t.accumulate(ib, advact::matmul(transpose(t.node(ia).value), n.grad));
                    });
    }

    Value add(Value a, Value b) {
        Matrix out = advact::add(a.val(), b.val());
        const std::size_t ia = a.index, ib = b.index;
        return push("add", {}, {ia, ib}, std::move(out), true,
                    [ia, ib](Tape& t, const TapeNode& n) {
                        t.accumulate(ia, n.grad);
                        t.accumulate(ib, n.grad);
                    });
    }

    Value sub(Value a, Value b) {
        Matrix out = advact::sub(a.val(), b.val());
        const std::size_t ia = a.index, ib = b.index;
        return push("sub", {}, {ia, ib}, std::move(out), true,
                    [ia, ib](Tape& t, const TapeNode& n) {
                        t.accumulate(ia, n.grad);
                        t.accumulate(ib, advact::scale(n.grad, -1.0));
                    });
    }

    Value hadamard(Value a, Value b) {
        Matrix out = advact::hadamard(a.val(), b.val());
        const std::size_t ia = a.index, ib = b.index;
        return push("hadamard", {}, {ia, ib}, std::move(out), true,
                    [ia, ib](Tape& t, const TapeNode& n) {
                        t.accumulate(ia, advact::hadamard(n.grad, t.node(ib).value));
                        t.accumulate(ib, advact::hadamard(n.grad, t.node(ia).value));
                    });
    }

    Value scale(Value a, double s) {
        Matrix out = advact::scale(a.val(), s);
        const std::size_t ia = a.index;
        return push("scale", {}, {ia}, std::move(out), true,
                    [ia, s](Tape& t, const TapeNode& n) {
                        t.accumulate(ia, advact::scale(n.grad, s));
                    });
    }

    // Bias broadcast: a (m x c) + row (1 x c).
    Value add_rows(Value a, Value row) {
        Matrix out = advact::add_rows(a.val(), row.val());
        const std::size_t ia = a.index, ir = row.index;
        return push("add_rows", {}, {ia, ir}, std::move(out), true,
                    [ia, ir](Tape& t, const TapeNode& n) {
                        t.accumulate(ia, n.grad);
                        Matrix rg(1, n.grad.cols());
                        for (std::size_t i = 0; i < n.grad.rows(); ++i)
                            for (std::size_t j = 0; j < n.grad.cols(); ++j)
                                rg(0, j) += n.grad(i, j);
                        t.accumulate(ir, rg);
                    });
    }

    Value sum(Value a) {
        Matrix out = Matrix::scalar(sum_all(a.val()));
        const std::size_t ia = a.index;
        return push("sum", {}, {ia}, std::move(out), true,
                    [ia](Tape& t, const TapeNode& n) {
                        const double g = n.grad(0, 0);
                        Matrix pg(t.node(ia).value.rows(), t.node(ia).value.cols(), g);
                        t.accumulate(ia, pg);
                    });
    }

    Value mean(Value a) {
        const double inv = 1.0 / static_cast<double>(a.val().size());
        Matrix out = Matrix::scalar(sum_all(a.val()) * inv);
        const std::size_t ia = a.index;
        return push("mean", {}, {ia}, std::move(out), true,
                    [ia, inv](Tape& t, const TapeNode& n) {
                        const double g = n.grad(0, 0) * inv;
                        Matrix pg(t.node(ia).value.rows(), t.node(ia).value.cols(), g);
                        t.accumulate(ia, pg);
                    });
    }

    // Elementwise activation with a caller-supplied closed-form derivative.
    Value apply(Value a, const ScalarMap& f, const ScalarMap& f_prime, std::string label = {}) {
        Matrix out = map(a.val(), f);
        const std::size_t ia = a.index;
        ScalarMap fp = f_prime;
        return push("apply", std::move(label), {ia}, std::move(out), true,
                    [ia, fp](Tape& t, const TapeNode& n) {
                        Matrix pg = n.grad;
                        const Matrix& x = t.node(ia).value;
                        for (std::size_t i = 0; i < pg.size(); ++i)
                            pg.data()[i] *= fp(x.data()[i]);
                        t.accumulate(ia, pg);
                    });
    }

    // Mean squared error against a constant target: mean((a - y)^2).
    Value mse_loss(Value a, const Matrix& target) {
        if (!a.val().same_shape(target))
            throw ShapeError("mse_loss: " + a.val().shape_str() + " vs " + target.shape_str());
        Matrix diff = advact::sub(a.val(), target);
        const double inv = 1.0 / static_cast<double>(diff.size());
        double s = 0.0;
        for (std::size_t i = 0; i < diff.size(); ++i) s += diff.data()[i] * diff.data()[i];
        const std::size_t ia = a.index;
        return push("mse_loss", {}, {ia}, Matrix::scalar(s * inv), true,
                    [ia, diff, inv](Tape& t, const TapeNode& n) {
                        Matrix pg = advact::scale(diff, 2.0 * inv * n.grad(0, 0));
                        t.accumulate(ia, pg);
                    });
    }

    // Softmax cross-entropy over rows of logits; labels is (m x 1) class ids.
    Value cross_entropy_loss(Value logits, const Matrix& labels) {
        const Matrix& z = logits.val();
        if (labels.rows() != z.rows() || labels.cols() != 1)
            throw ShapeError("cross_entropy_loss: labels " + labels.shape_str() +
                             " vs logits " + z.shape_str());
        const std::size_t m = z.rows(), k = z.cols();
        Matrix probs(m, k);
        double loss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double mx = z(i, 0);
            for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, z(i, j));
            double denom = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                probs(i, j) = std::exp(z(i, j) - mx);
                denom += probs(i, j);
            }
            for (std::size_t j = 0; j < k; ++j) probs(i, j) /= denom;
            const auto y = static_cast<std::size_t>(labels(i, 0));
            if (y >= k) throw DomainError("cross_entropy_loss: label out of range");
            loss -= std::log(std::max(probs(i, y), 1e-300));
        }
        loss /= static_cast<double>(m);
        const std::size_t ia = logits.index;
        return push("cross_entropy", {}, {ia}, Matrix::scalar(loss), true,
                    [ia, probs, labels, m](Tape& t, const TapeNode& n) {
                        Matrix pg = probs;
                        for (std::size_t i = 0; i < m; ++i)
                            pg(i, static_cast<std::size_t>(labels(i, 0))) -= 1.0;
                        t.accumulate(ia, advact::scale(pg, n.grad(0, 0) / static_cast<double>(m)));
                    });
    }

    // Generic multi-parent node for custom formulas (split recombinations,
    // adversarial forwards, batch norm). `backprop` receives the finished
    // node and pushes gradient into any of the listed parents.
    Value custom(std::string op, std::string label, std::vector<std::size_t> parents,
                 Matrix value, std::function<void(Tape&, const TapeNode&)> backprop) {
        return push(std::move(op), std::move(label), std::move(parents), std::move(value),
                    true, std::move(backprop));
    }

    // Adds `grad` into parent i's gradient slot.
    void accumulate(std::size_t i, const Matrix& grad) {
        TapeNode& p = nodes_[i];
        if (!p.grad_allocated) {
            p.grad = Matrix(p.value.rows(), p.value.cols());
            p.grad_allocated = true;
        }
        if (!p.grad.same_shape(grad))
            throw ShapeError("gradient shape mismatch at node '" + context(p) + "'");
        for (std::size_t k = 0; k < grad.size(); ++k) p.grad.data()[k] += grad.data()[k];
    }

    // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse order.
    // Every node reachable from `loss` ends with a populated gradient.
    void backward(Value loss) {
        if (loss.tape != this) throw ContractError("backward: value from another tape");
        TapeNode& ln = nodes_[loss.index];
        if (ln.value.rows() != 1 || ln.value.cols() != 1)
            throw ContractError("backward: loss must be 1x1, got " + ln.value.shape_str());
        for (auto& n : nodes_) {
            n.grad_allocated = false;
            n.grad = Matrix();
        }
        ln.grad = Matrix::scalar(1.0);
        ln.grad_allocated = true;
        for (std::size_t i = loss.index + 1; i-- > 0;) {
            TapeNode& n = nodes_[i];
            if (!n.grad_allocated || !n.backprop) continue;
            if (checked_ && !n.grad.all_finite())
                throw NumericError("non-finite gradient at node '" + context(n) + "'");
            n.backprop(*this, n);
        }
        if (checked_) {
            for (const auto& n : nodes_)
                if (n.grad_allocated && !n.grad.all_finite())
                    throw NumericError("non-finite gradient at node '" + context(n) + "'");
        }
    }

  private:
    static std::string context(const TapeNode& n) {
        return n.label.empty() ? n.op : n.label + " (" + n.op + ")";
    }

    Value push(std::string op, std::string label, std::vector<std::size_t> parents,
               Matrix value, bool requires_grad,
               std::function<void(Tape&, const TapeNode&)> backprop) {
        if (checked_ && !value.all_finite())
            throw NumericError("non-finite value in " +
                               (label.empty() ? op : label + " (" + op + ")"));
        TapeNode n;
        n.op = std::move(op);
        n.label = std::move(label);
        n.parents = std::move(parents);
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        n.backprop = std::move(backprop);
        nodes_.push_back(std::move(n));
        return Value{this, nodes_.size() - 1};
    }

    std::vector<TapeNode> nodes_;
    bool checked_;
};

inline const Matrix& Value::val() const { return tape->node(index).value; }
inline const Matrix& Value::grad() const { return tape->node(index).grad; }

} // namespace advact
