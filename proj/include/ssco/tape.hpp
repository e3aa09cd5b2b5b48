#pragma once
// Reverse-mode autodiff on a dynamic tape of dense-vector operations. Scoped
// to exactly the ops this project composes: affine layers, message passing,
// sphere normalization, masked softmax machinery, and hinge losses.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssco/errors.hpp"
#include "ssco/rng.hpp"
#include "ssco/vec.hpp"

namespace ssco {

struct TensorValue {
    std::vector<std::size_t> shape;
    Vec data;

    std::size_t size() const { return data.size(); }
    static std::size_t shape_product(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
};

struct Param {
    TensorValue tensor;
    Vec grad;
    Vec adam_m;
    Vec adam_v;
    double lr_scale = 1.0;

    std::size_t size() const { return tensor.size(); }
    Vec& value() { return tensor.data; }
    const Vec& value() const { return tensor.data; }
};

// Named parameters with gradient accumulators and optimizer moments. Ordered
// iteration keeps training runs bit-reproducible.
class ParameterSet {
public:
    Param& add(const std::string& name, std::vector<std::size_t> shape, Vec init) {
        if (params_.count(name)) throw ConfigError("parameter already exists: " + name);
        if (TensorValue::shape_product(shape) != init.size())
            throw ConfigError("parameter shape/data mismatch: " + name);
        Param p;
        p.tensor.shape = std::move(shape);
        p.tensor.data = std::move(init);
        p.grad.assign(p.tensor.data.size(), 0.0);
        p.adam_m.assign(p.tensor.data.size(), 0.0);
        p.adam_v.assign(p.tensor.data.size(), 0.0);
        return params_.emplace(name, std::move(p)).first->second;
    }

    bool contains(const std::string& name) const { return params_.count(name) > 0; }

    Param& at(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("no such parameter: " + name);
        return it->second;
    }
    const Param& at(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw ConfigError("no such parameter: " + name);
        return it->second;
    }

    void zero_grad() {
        for (auto& [name, p] : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
    }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }
    std::size_t count() const { return params_.size(); }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& [name, p] : params_) n += p.size();
        return n;
    }

    int step_count = 0;  // Adam bias-correction step

private:
    std::map<std::string, Param> params_;
};

class Tape {
public:
    using Var = int;

    const Vec& value(Var v) const { return nodes_[static_cast<std::size_t>(v)].value; }
    double scalar(Var v) const {
        const Vec& x = value(v);
        assert(x.size() == 1);
        return x[0];
    }
    Vec& grad(Var v) { return nodes_[static_cast<std::size_t>(v)].grad; }

    Var constant(Vec v) { return push(std::move(v), {}, nullptr); }
    Var constant_scalar(double x) { return constant(Vec{x}); }

    // Leaf bound to a parameter: backward() accumulates into p.grad.
    Var param(Param& p) { return push(p.value(), {}, &p); }

    Var add(Var a, Var b) {
        const Vec& xa = value(a);
        const Vec& xb = value(b);
        assert(xa.size() == xb.size());
        Vec out(xa.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = xa[i] + xb[i];
        return push(std::move(out), [a, b](Tape& t, Var self) {
            axpy(1.0, t.grad(self), t.grad(a));
            axpy(1.0, t.grad(self), t.grad(b));
        });
    }

    Var sub(Var a, Var b) {
        const Vec& xa = value(a);
        const Vec& xb = value(b);
        assert(xa.size() == xb.size());
        Vec out(xa.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = xa[i] - xb[i];
        return push(std::move(out), [a, b](Tape& t, Var self) {
            axpy(1.0, t.grad(self), t.grad(a));
            axpy(-1.0, t.grad(self), t.grad(b));
        });
    }

    Var mul(Var a, Var b) {
        const Vec& xa = value(a);
        const Vec& xb = value(b);
        assert(xa.size() == xb.size());
        Vec out(xa.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = xa[i] * xb[i];
        return push(std::move(out), [a, b](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            const Vec& va = t.value(a);
            const Vec& vb = t.value(b);
            Vec& ga = t.grad(a);
            Vec& gb = t.grad(b);
            for (std::size_t i = 0; i < g.size(); ++i) {
                ga[i] += g[i] * vb[i];
                gb[i] += g[i] * va[i];
            }
        });
    }

    Var scale(Var a, double c) {
        Vec out = value(a);
        for (double& x : out) x *= c;
        return push(std::move(out), [a, c](Tape& t, Var self) {
            axpy(c, t.grad(self), t.grad(a));
        });
    }

    Var relu(Var a) {
        Vec out = value(a);
        for (double& x : out) x = x > 0.0 ? x : 0.0;
        return push(std::move(out), [a](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            const Vec& va = t.value(a);
            Vec& ga = t.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i)
                if (va[i] > 0.0) ga[i] += g[i];  // subgradient 0 at the kink
        });
    }

    Var softplus(Var a) {
        Vec out = value(a);
        for (double& x : out) x = x > 30.0 ? x : std::log1p(std::exp(x));
        return push(std::move(out), [a](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            const Vec& va = t.value(a);
            Vec& ga = t.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i)
                ga[i] += g[i] / (1.0 + std::exp(-va[i]));
        });
    }

    Var exp(Var a) {
        Vec out = value(a);
        for (double& x : out) x = std::exp(x);
        return push(std::move(out), [a](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            const Vec& vo = t.value(self);
            Vec& ga = t.grad(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vo[i];
        });
    }

    Var concat(Var a, Var b) {
        Vec out = value(a);
        const Vec& xb = value(b);
        out.insert(out.end(), xb.begin(), xb.end());
        const std::size_t na = value(a).size();
        return push(std::move(out), [a, b, na](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            Vec& ga = t.grad(a);
            Vec& gb = t.grad(b);
            for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
            for (std::size_t i = na; i < g.size(); ++i) gb[i - na] += g[i];
        });
    }

    Var sum(Var a) {
        double acc = 0.0;
        for (double x : value(a)) acc += x;
        return push(Vec{acc}, [a](Tape& t, Var self) {
            const double g = t.grad(self)[0];
            for (double& x : t.grad(a)) x += g;
        });
    }

    Var mean(Var a) {
        const std::size_t n = value(a).size();
        return scale(sum(a), 1.0 / static_cast<double>(n));
    }

    Var dot(Var a, Var b) {
        const double d = dot_product(value(a), value(b));
        return push(Vec{d}, [a, b](Tape& t, Var self) {
            const double g = t.grad(self)[0];
            axpy(g, t.value(b), t.grad(a));
            axpy(g, t.value(a), t.grad(b));
        });
    }

    Var pick(Var a, std::size_t index) {
        return push(Vec{value(a)[index]}, [a, index](Tape& t, Var self) {
            t.grad(a)[index] += t.grad(self)[0];
        });
    }

    Var stop_grad(Var a) { return push(value(a), {}, nullptr); }

    // y = W x + b. W row-major (rows x cols), b length rows.
    Var affine(Var w, Var b, Var x, std::size_t rows, std::size_t cols) {
        const Vec& wv = value(w);
        const Vec& bv = value(b);
        const Vec& xv = value(x);
        assert(wv.size() == rows * cols && bv.size() == rows && xv.size() == cols);
        Vec out(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = bv[r];
            const double* wr = wv.data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * xv[c];
            out[r] = acc;
        }
        return push(std::move(out), [w, b, x, rows, cols](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            const Vec& wv = t.value(w);
            const Vec& xv = t.value(x);
            Vec& gw = t.grad(w);
            Vec& gb = t.grad(b);
            Vec& gx = t.grad(x);
            for (std::size_t r = 0; r < rows; ++r) {
                const double gr = g[r];
                gb[r] += gr;
                double* gwr = gw.data() + r * cols;
                const double* wr = wv.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) {
                    gwr[c] += gr * xv[c];
                    gx[c] += gr * wr[c];
                }
            }
        });
    }

    // Per-node affine over a row-major (nodes x in_dim) feature matrix.
    Var node_affine(Var w, Var b, Var feats, std::size_t nodes, std::size_t in_dim,
                    std::size_t out_dim) {
        const Vec& wv = value(w);
        const Vec& bv = value(b);
        const Vec& fv = value(feats);
        assert(wv.size() == out_dim * in_dim && bv.size() == out_dim &&
               fv.size() == nodes * in_dim);
        Vec out(nodes * out_dim);
        for (std::size_t v = 0; v < nodes; ++v) {
            const double* row = fv.data() + v * in_dim;
            double* orow = out.data() + v * out_dim;
            for (std::size_t r = 0; r < out_dim; ++r) {
                double acc = bv[r];
                const double* wr = wv.data() + r * in_dim;
                for (std::size_t c = 0; c < in_dim; ++c) acc += wr[c] * row[c];
                orow[r] = acc;
            }
        }
        return push(std::move(out), [w, b, feats, nodes, in_dim, out_dim](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            const Vec& wv = t.value(w);
            const Vec& fv = t.value(feats);
            Vec& gw = t.grad(w);
            Vec& gb = t.grad(b);
            Vec& gf = t.grad(feats);
            for (std::size_t v = 0; v < nodes; ++v) {
                const double* row = fv.data() + v * in_dim;
                const double* grow = g.data() + v * out_dim;
                double* gfrow = gf.data() + v * in_dim;
                for (std::size_t r = 0; r < out_dim; ++r) {
                    const double gr = grow[r];
                    gb[r] += gr;
                    double* gwr = gw.data() + r * in_dim;
                    const double* wr = wv.data() + r * in_dim;
                    for (std::size_t c = 0; c < in_dim; ++c) {
                        gwr[c] += gr * row[c];
                        gfrow[c] += gr * wr[c];
                    }
                }
            }
        });
    }

    // Linear message aggregation: out[v] = sum over edges (u -> v) of feats[u].
    Var adjacency_matmul(std::vector<std::pair<int, int>> edges, Var feats, std::size_t nodes,
                         std::size_t dim) {
        const Vec& fv = value(feats);
        assert(fv.size() == nodes * dim);
        Vec out(nodes * dim, 0.0);
        for (const auto& [u, v] : edges) {
            const double* src = fv.data() + static_cast<std::size_t>(u) * dim;
            double* dst = out.data() + static_cast<std::size_t>(v) * dim;
            for (std::size_t c = 0; c < dim; ++c) dst[c] += src[c];
        }
        return push(std::move(out), [edges = std::move(edges), feats, dim](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            Vec& gf = t.grad(feats);
            for (const auto& [u, v] : edges) {
                const double* gs = g.data() + static_cast<std::size_t>(v) * dim;
                double* gd = gf.data() + static_cast<std::size_t>(u) * dim;
                for (std::size_t c = 0; c < dim; ++c) gd[c] += gs[c];
            }
        });
    }

    Var mean_pool(Var feats, std::size_t nodes, std::size_t dim) {
        const Vec& fv = value(feats);
        assert(fv.size() == nodes * dim);
        Vec out(dim, 0.0);
        for (std::size_t v = 0; v < nodes; ++v)
            for (std::size_t c = 0; c < dim; ++c) out[c] += fv[v * dim + c];
        const double inv = 1.0 / static_cast<double>(nodes);
        for (double& x : out) x *= inv;
        return push(std::move(out), [feats, nodes, dim, inv](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            Vec& gf = t.grad(feats);
            for (std::size_t v = 0; v < nodes; ++v)
                for (std::size_t c = 0; c < dim; ++c) gf[v * dim + c] += g[c] * inv;
        });
    }

    // Row `row` of a (rows x cols) matrix parameter.
    Var gather_row(Var matrix, std::size_t row, std::size_t cols) {
        const Vec& mv = value(matrix);
        Vec out(mv.begin() + static_cast<long>(row * cols),
                mv.begin() + static_cast<long>((row + 1) * cols));
        return push(std::move(out), [matrix, row, cols](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            Vec& gm = t.grad(matrix);
            for (std::size_t c = 0; c < cols; ++c) gm[row * cols + c] += g[c];
        });
    }

    // x / ||x||_2, with a floor to avoid dividing by zero.
    Var l2_normalize(Var a) {
        const Vec& xv = value(a);
        const double n = std::max(norm2(xv), 1e-12);
        Vec out = xv;
        for (double& x : out) x /= n;
        return push(std::move(out), [a, n](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            const Vec& y = t.value(self);
            Vec& ga = t.grad(a);
            const double gy = dot_product(g, y);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += (g[i] - gy * y[i]) / n;
        });
    }

    // Euclidean norm of (a - b): the chordal distance for unit vectors.
    Var chordal(Var a, Var b) {
        const Vec& xa = value(a);
        const Vec& xb = value(b);
        double acc = 0.0;
        for (std::size_t i = 0; i < xa.size(); ++i) {
            const double d = xa[i] - xb[i];
            acc += d * d;
        }
        const double dist = std::sqrt(acc);
        return push(Vec{dist}, [a, b, dist](Tape& t, Var self) {
            if (dist < 1e-12) return;  // non-differentiable at coincidence; use 0
            const double g = t.grad(self)[0] / dist;
            const Vec& xa = t.value(a);
            const Vec& xb = t.value(b);
            Vec& ga = t.grad(a);
            Vec& gb = t.grad(b);
            for (std::size_t i = 0; i < xa.size(); ++i) {
                const double d = g * (xa[i] - xb[i]);
                ga[i] += d;
                gb[i] -= d;
            }
        });
    }

    // Cross-entropy of softmax(logits) against a fixed target distribution.
    Var softmax_cross_entropy(Var logits, Vec target) {
        const Vec& lv = value(logits);
        assert(lv.size() == target.size());
        const double lse = log_sum_exp(lv);
        double loss = 0.0;
        for (std::size_t i = 0; i < lv.size(); ++i) loss += target[i] * (lse - lv[i]);
        return push(Vec{loss}, [logits, target = std::move(target), lse](Tape& t, Var self) {
            const double g = t.grad(self)[0];
            const Vec& lv = t.value(logits);
            Vec& gl = t.grad(logits);
            for (std::size_t i = 0; i < lv.size(); ++i)
                gl[i] += g * (std::exp(lv[i] - lse) - target[i]);
        });
    }

    // Log-probabilities of a softmax restricted to masked-in entries.
    // Masked-out entries take the fill value and receive no gradient.
    Var masked_log_softmax(Var logits, std::vector<std::uint8_t> mask, double fill = -1e9) {
        const Vec& lv = value(logits);
        assert(lv.size() == mask.size());
        double max_l = -1e300;
        for (std::size_t i = 0; i < lv.size(); ++i)
            if (mask[i] && lv[i] > max_l) max_l = lv[i];
        if (max_l == -1e300) throw ConfigError("masked_log_softmax: empty support");
        double z = 0.0;
        for (std::size_t i = 0; i < lv.size(); ++i)
            if (mask[i]) z += std::exp(lv[i] - max_l);
        const double lse = max_l + std::log(z);
        Vec out(lv.size(), fill);
        for (std::size_t i = 0; i < lv.size(); ++i)
            if (mask[i]) out[i] = lv[i] - lse;
        return push(std::move(out), [logits, mask = std::move(mask), lse](Tape& t, Var self) {
            const Vec& g = t.grad(self);
            const Vec& lv = t.value(logits);
            Vec& gl = t.grad(logits);
            double gsum = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (mask[i]) gsum += g[i];
            for (std::size_t i = 0; i < g.size(); ++i)
                if (mask[i]) gl[i] += g[i] - std::exp(lv[i] - lse) * gsum;
        });
    }

    // Runs the reverse pass from a scalar loss and accumulates parameter
    // gradients into their bound Param objects.
    void backward(Var loss) {
        assert(value(loss).size() == 1);
        for (auto& node : nodes_) node.grad.assign(node.value.size(), 0.0);
        nodes_[static_cast<std::size_t>(loss)].grad[0] = 1.0;
        for (int i = loss; i >= 0; --i) {
            auto& node = nodes_[static_cast<std::size_t>(i)];
            if (node.back) node.back(*this, i);
        }
        for (auto& node : nodes_) {
            if (node.bound) axpy(1.0, node.grad, node.bound->grad);
        }
    }

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Vec value;
        Vec grad;
        std::function<void(Tape&, Var)> back;
        Param* bound = nullptr;
    };

    static double dot_product(const Vec& a, const Vec& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    }

    static double log_sum_exp(const Vec& v) {
        double m = v[0];
        for (double x : v) m = std::max(m, x);
        double z = 0.0;
        for (double x : v) z += std::exp(x - m);
        return m + std::log(z);
    }

    Var push(Vec value, std::function<void(Tape&, Var)> back, Param* bound = nullptr) {
        Node node;
        node.value = std::move(value);
        node.back = std::move(back);
        node.bound = bound;
        nodes_.push_back(std::move(node));
        return static_cast<Var>(nodes_.size() - 1);
    }

    std::vector<Node> nodes_;
};

}  // namespace ssco
