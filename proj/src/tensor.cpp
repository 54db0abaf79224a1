#include "kgxrec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "kgxrec/error.hpp"

namespace kgxrec::nn {

struct Tensor::Node {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> val;
    mutable std::vector<double> grad;  // lazily allocated
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    void ensure_grad() const {
        if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
    }
};

namespace {

using Node = Tensor::Node;

std::shared_ptr<Node> make_leaf(size_t rows, size_t cols, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->rows = rows;
    n->cols = cols;
    n->val.assign(rows * cols, 0.0);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return n;
}

std::shared_ptr<Node> make_op(std::vector<std::shared_ptr<Node>> parents, size_t rows, size_t cols) {
    auto n = std::make_shared<Node>();
    n->rows = rows;
    n->cols = cols;
    n->val.assign(rows * cols, 0.0);
    n->requires_grad = false;
    for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
    n->parents = std::move(parents);
    return n;
}

// C += A * B (A: m x k, B: k x n, C: m x n)
void mm_acc(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = b + l * n;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C += A * B^T (A: m x n, B: k x n, C: m x k)
void mm_acc_abt(const double* a, const double* b, double* c, size_t m, size_t n, size_t k) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * n;
        double* crow = c + i * k;
        for (size_t l = 0; l < k; ++l) {
            const double* brow = b + l * n;
            double s = 0.0;
            for (size_t j = 0; j < n; ++j) s += arow[j] * brow[j];
            crow[l] += s;
        }
    }
}

// C += A^T * B (A: m x k, B: m x n, C: k x n)
void mm_acc_atb(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            if (av == 0.0) continue;
            double* crow = c + l * n;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw NumericError(std::string(op) + ": shape mismatch");
}

}  // namespace

Tensor Tensor::zeros(size_t rows, size_t cols, bool requires_grad) {
    return Tensor(make_leaf(rows, cols, requires_grad));
}

Tensor Tensor::full(size_t rows, size_t cols, double value, bool requires_grad) {
    auto n = make_leaf(rows, cols, requires_grad);
    std::fill(n->val.begin(), n->val.end(), value);
    return Tensor(std::move(n));
}

Tensor Tensor::from(size_t rows, size_t cols, std::vector<double> data, bool requires_grad) {
    if (data.size() != rows * cols) throw NumericError("Tensor::from: data size mismatch");
    auto n = make_leaf(rows, cols, requires_grad);
    n->val = std::move(data);
    return Tensor(std::move(n));
}

Tensor Tensor::randn(size_t rows, size_t cols, double stddev, Rng& rng, bool requires_grad) {
    auto n = make_leaf(rows, cols, requires_grad);
    for (double& v : n->val) v = rng.normal(0.0, stddev);
    return Tensor(std::move(n));
}

size_t Tensor::rows() const { return n_ ? n_->rows : 0; }
size_t Tensor::cols() const { return n_ ? n_->cols : 0; }

const std::vector<double>& Tensor::value() const { return n_->val; }
std::vector<double>& Tensor::value() { return n_->val; }

const std::vector<double>& Tensor::grad() const {
    n_->ensure_grad();
    return n_->grad;
}

std::vector<double>& Tensor::grad() {
    n_->ensure_grad();
    return n_->grad;
}

double Tensor::at(size_t r, size_t c) const { return n_->val[r * n_->cols + c]; }
double& Tensor::at(size_t r, size_t c) { return n_->val[r * n_->cols + c]; }

double Tensor::scalar() const {
    if (size() != 1) throw NumericError("scalar() on a non-1x1 tensor");
    return n_->val[0];
}

bool Tensor::requires_grad() const { return n_ && n_->requires_grad; }

void Tensor::zero_grad() {
    n_->ensure_grad();
    std::fill(n_->grad.begin(), n_->grad.end(), 0.0);
}

const void* Tensor::node_id() const { return n_.get(); }

void Tensor::backward(double seed) const {
    if (!n_ || n_->rows != 1 || n_->cols != 1)
        throw NumericError("backward() requires a 1x1 tensor");
    if (!n_->requires_grad) return;

    // Post-order over the tape; inputs land before their consumers.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, bool>> stack;
    stack.emplace_back(n_.get(), false);
    while (!stack.empty()) {
        auto [node, expanded] = stack.back();
        stack.pop_back();
        if (expanded) {
            order.push_back(node);
            continue;
        }
        if (visited.count(node) != 0) continue;
        visited.insert(node);
        stack.emplace_back(node, true);
        for (const auto& p : node->parents) {
            if (p->requires_grad && visited.count(p.get()) == 0) stack.emplace_back(p.get(), false);
        }
    }

    n_->ensure_grad();
    n_->grad[0] += seed;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backward_fn) {
            node->ensure_grad();
            node->backward_fn(*node);
        }
    }
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    auto out = make_op({a.node(), b.node()}, a.rows(), a.cols());
    for (size_t i = 0; i < out->val.size(); ++i) out->val[i] = a.value()[i] + b.value()[i];
    if (out->requires_grad)
        out->backward_fn = [](Node& self) {
            for (int p = 0; p < 2; ++p) {
                Node& parent = *self.parents[static_cast<size_t>(p)];
                if (!parent.requires_grad) continue;
                parent.ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) parent.grad[i] += self.grad[i];
            }
        };
    return Tensor(out);
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    auto out = make_op({a.node(), b.node()}, a.rows(), a.cols());
    for (size_t i = 0; i < out->val.size(); ++i) out->val[i] = a.value()[i] - b.value()[i];
    if (out->requires_grad)
        out->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            if (pa.requires_grad) {
                pa.ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
            }
            if (pb.requires_grad) {
                pb.ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
            }
        };
    return Tensor(out);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    auto out = make_op({a.node(), b.node()}, a.rows(), a.cols());
    for (size_t i = 0; i < out->val.size(); ++i) out->val[i] = a.value()[i] * b.value()[i];
    if (out->requires_grad)
        out->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            if (pa.requires_grad) {
                pa.ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.val[i];
            }
            if (pb.requires_grad) {
                pb.ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.val[i];
            }
        };
    return Tensor(out);
}

Tensor scale(const Tensor& a, double c) {
    auto out = make_op({a.node()}, a.rows(), a.cols());
    for (size_t i = 0; i < out->val.size(); ++i) out->val[i] = a.value()[i] * c;
    if (out->requires_grad)
        out->backward_fn = [c](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * c;
        };
    return Tensor(out);
}

Tensor add_rowvec(const Tensor& a, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) throw NumericError("add_rowvec: shape mismatch");
    auto out = make_op({a.node(), row.node()}, a.rows(), a.cols());
    const size_t n = a.cols();
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < n; ++j) out->val[i * n + j] = a.value()[i * n + j] + row.value()[j];
    if (out->requires_grad)
        out->backward_fn = [n](Node& self) {
            Node& pa = *self.parents[0];
            Node& pr = *self.parents[1];
            if (pa.requires_grad) {
                pa.ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
            }
            if (pr.requires_grad) {
                pr.ensure_grad();
                for (size_t i = 0; i < self.rows; ++i)
                    for (size_t j = 0; j < n; ++j) pr.grad[j] += self.grad[i * n + j];
            }
        };
    return Tensor(out);
}

Tensor transpose(const Tensor& a) {
    auto out = make_op({a.node()}, a.cols(), a.rows());
    const size_t r = a.rows(), c = a.cols();
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) out->val[j * r + i] = a.value()[i * c + j];
    if (out->requires_grad)
        out->backward_fn = [r, c](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (size_t i = 0; i < r; ++i)
                for (size_t j = 0; j < c; ++j) pa.grad[i * c + j] += self.grad[j * r + i];
        };
    return Tensor(out);
}

Tensor slice_cols(const Tensor& a, size_t c0, size_t c1) {
    if (c0 >= c1 || c1 > a.cols()) throw NumericError("slice_cols: bad range");
    const size_t w = c1 - c0, n = a.cols();
    auto out = make_op({a.node()}, a.rows(), w);
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < w; ++j) out->val[i * w + j] = a.value()[i * n + c0 + j];
    if (out->requires_grad)
        out->backward_fn = [c0, w, n](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (size_t i = 0; i < self.rows; ++i)
                for (size_t j = 0; j < w; ++j) pa.grad[i * n + c0 + j] += self.grad[i * w + j];
        };
    return Tensor(out);
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw NumericError("concat_cols: no inputs");
    const size_t r = parts[0].rows();
    size_t total = 0;
    std::vector<std::shared_ptr<Node>> parents;
    std::vector<size_t> widths;
    for (const Tensor& p : parts) {
        if (p.rows() != r) throw NumericError("concat_cols: row mismatch");
        parents.push_back(p.node());
        widths.push_back(p.cols());
        total += p.cols();
    }
    auto out = make_op(std::move(parents), r, total);
    size_t off = 0;
    for (size_t k = 0; k < parts.size(); ++k) {
        const size_t w = widths[k];
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < w; ++j) out->val[i * total + off + j] = parts[k].value()[i * w + j];
        off += w;
    }
    if (out->requires_grad)
        out->backward_fn = [widths, total](Node& self) {
            size_t off = 0;
            for (size_t k = 0; k < widths.size(); ++k) {
                Node& p = *self.parents[k];
                const size_t w = widths[k];
                if (p.requires_grad) {
                    p.ensure_grad();
                    for (size_t i = 0; i < self.rows; ++i)
                        for (size_t j = 0; j < w; ++j) p.grad[i * w + j] += self.grad[i * total + off + j];
                }
                off += w;
            }
        };
    return Tensor(out);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw NumericError("matmul: inner dimension mismatch");
    const size_t m = a.rows(), k = a.cols(), n = b.cols();
    auto out = make_op({a.node(), b.node()}, m, n);
    mm_acc(a.value().data(), b.value().data(), out->val.data(), m, k, n);
    if (out->requires_grad)
        out->backward_fn = [m, k, n](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            if (pa.requires_grad) {
                pa.ensure_grad();
                mm_acc_abt(self.grad.data(), pb.val.data(), pa.grad.data(), m, n, k);
            }
            if (pb.requires_grad) {
                pb.ensure_grad();
                mm_acc_atb(pa.val.data(), self.grad.data(), pb.grad.data(), m, k, n);
            }
        };
    return Tensor(out);
}

Tensor dot_rows(const Tensor& a, const Tensor& b) {
    if (a.rows() != 1 || b.rows() != 1 || a.cols() != b.cols())
        throw NumericError("dot_rows: expects two 1xd tensors");
    auto out = make_op({a.node(), b.node()}, 1, 1);
    double s = 0.0;
    for (size_t j = 0; j < a.cols(); ++j) s += a.value()[j] * b.value()[j];
    out->val[0] = s;
    if (out->requires_grad)
        out->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            Node& pb = *self.parents[1];
            const double g = self.grad[0];
            if (pa.requires_grad) {
                pa.ensure_grad();
                for (size_t j = 0; j < pa.val.size(); ++j) pa.grad[j] += g * pb.val[j];
            }
            if (pb.requires_grad) {
                pb.ensure_grad();
                for (size_t j = 0; j < pb.val.size(); ++j) pb.grad[j] += g * pa.val[j];
            }
        };
    return Tensor(out);
}

Tensor gelu(const Tensor& a) {
    auto out = make_op({a.node()}, a.rows(), a.cols());
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (size_t i = 0; i < out->val.size(); ++i) {
        const double x = a.value()[i];
        out->val[i] = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
    }
    if (out->requires_grad)
        out->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            constexpr double inv_sqrt2 = 0.70710678118654752440;
            constexpr double inv_sqrt2pi = 0.39894228040143267794;
            for (size_t i = 0; i < self.grad.size(); ++i) {
                const double x = pa.val[i];
                const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
                const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
                pa.grad[i] += self.grad[i] * (cdf + x * pdf);
            }
        };
    return Tensor(out);
}

Tensor softmax_rows(const Tensor& a, const std::vector<double>* add_mask) {
    if (add_mask != nullptr && add_mask->size() != a.size())
        throw NumericError("softmax_rows: mask size mismatch");
    const size_t r = a.rows(), c = a.cols();
    auto out = make_op({a.node()}, r, c);
    for (size_t i = 0; i < r; ++i) {
        double mx = -1e300;
        for (size_t j = 0; j < c; ++j) {
            double z = a.value()[i * c + j] + (add_mask ? (*add_mask)[i * c + j] : 0.0);
            out->val[i * c + j] = z;
            mx = std::max(mx, z);
        }
        double sum = 0.0;
        for (size_t j = 0; j < c; ++j) {
            double e = std::exp(out->val[i * c + j] - mx);
            out->val[i * c + j] = e;
            sum += e;
        }
        for (size_t j = 0; j < c; ++j) out->val[i * c + j] /= sum;
    }
    if (out->requires_grad)
        out->backward_fn = [r, c](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (size_t i = 0; i < r; ++i) {
                const double* p = self.val.data() + i * c;
                const double* g = self.grad.data() + i * c;
                double dotpg = 0.0;
                for (size_t j = 0; j < c; ++j) dotpg += p[j] * g[j];
                for (size_t j = 0; j < c; ++j) pa.grad[i * c + j] += p[j] * (g[j] - dotpg);
            }
        };
    return Tensor(out);
}

Tensor log_softmax_rows(const Tensor& a) {
    const size_t r = a.rows(), c = a.cols();
    auto out = make_op({a.node()}, r, c);
    for (size_t i = 0; i < r; ++i) {
        double mx = -1e300;
        for (size_t j = 0; j < c; ++j) mx = std::max(mx, a.value()[i * c + j]);
        double sum = 0.0;
        for (size_t j = 0; j < c; ++j) sum += std::exp(a.value()[i * c + j] - mx);
        const double lse = mx + std::log(sum);
        for (size_t j = 0; j < c; ++j) out->val[i * c + j] = a.value()[i * c + j] - lse;
    }
    if (out->requires_grad)
        out->backward_fn = [r, c](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (size_t i = 0; i < r; ++i) {
                const double* lp = self.val.data() + i * c;
                const double* g = self.grad.data() + i * c;
                double gsum = 0.0;
                for (size_t j = 0; j < c; ++j) gsum += g[j];
                for (size_t j = 0; j < c; ++j) pa.grad[i * c + j] += g[j] - std::exp(lp[j]) * gsum;
            }
        };
    return Tensor(out);
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
    if (gain.rows() != 1 || gain.cols() != a.cols() || bias.rows() != 1 || bias.cols() != a.cols())
        throw NumericError("layer_norm: gain/bias must be 1 x cols");
    const size_t r = a.rows(), c = a.cols();
    auto out = make_op({a.node(), gain.node(), bias.node()}, r, c);
    std::vector<double> xhat(r * c);
    std::vector<double> inv_std(r);
    for (size_t i = 0; i < r; ++i) {
        const double* x = a.value().data() + i * c;
        double mu = 0.0;
        for (size_t j = 0; j < c; ++j) mu += x[j];
        mu /= static_cast<double>(c);
        double var = 0.0;
        for (size_t j = 0; j < c; ++j) var += (x[j] - mu) * (x[j] - mu);
        var /= static_cast<double>(c);
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std[i] = inv;
        for (size_t j = 0; j < c; ++j) {
            xhat[i * c + j] = (x[j] - mu) * inv;
            out->val[i * c + j] = gain.value()[j] * xhat[i * c + j] + bias.value()[j];
        }
    }
    if (out->requires_grad)
        out->backward_fn = [r, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
            Node& pa = *self.parents[0];
            Node& pg = *self.parents[1];
            Node& pb = *self.parents[2];
            if (pg.requires_grad) pg.ensure_grad();
            if (pb.requires_grad) pb.ensure_grad();
            if (pa.requires_grad) pa.ensure_grad();
            for (size_t i = 0; i < r; ++i) {
                const double* g = self.grad.data() + i * c;
                const double* xh = xhat.data() + i * c;
                if (pg.requires_grad || pb.requires_grad) {
                    for (size_t j = 0; j < c; ++j) {
                        if (pg.requires_grad) pg.grad[j] += g[j] * xh[j];
                        if (pb.requires_grad) pb.grad[j] += g[j];
                    }
                }
                if (pa.requires_grad) {
                    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                    for (size_t j = 0; j < c; ++j) {
                        const double dxh = g[j] * pg.val[j];
                        sum_dxhat += dxh;
                        sum_dxhat_xhat += dxh * xh[j];
                    }
                    const double n = static_cast<double>(c);
                    for (size_t j = 0; j < c; ++j) {
                        const double dxh = g[j] * pg.val[j];
                        pa.grad[i * c + j] +=
                            inv_std[i] * (dxh - sum_dxhat / n - xh[j] * sum_dxhat_xhat / n);
                    }
                }
            }
        };
    return Tensor(out);
}

Tensor embedding_rows(const Tensor& table, const std::vector<int32_t>& ids) {
    const size_t d = table.cols();
    for (int32_t id : ids)
        if (id < 0 || static_cast<size_t>(id) >= table.rows())
            throw NumericError("embedding_rows: id out of range");
    auto out = make_op({table.node()}, ids.size(), d);
    for (size_t i = 0; i < ids.size(); ++i) {
        const double* src = table.value().data() + static_cast<size_t>(ids[i]) * d;
        std::copy(src, src + d, out->val.data() + i * d);
    }
    if (out->requires_grad)
        out->backward_fn = [ids, d](Node& self) {
            Node& pt = *self.parents[0];
            pt.ensure_grad();
            for (size_t i = 0; i < ids.size(); ++i) {
                double* dst = pt.grad.data() + static_cast<size_t>(ids[i]) * d;
                const double* g = self.grad.data() + i * d;
                for (size_t j = 0; j < d; ++j) dst[j] += g[j];
            }
        };
    return Tensor(out);
}

Tensor pool_spans(const Tensor& a, const std::vector<Span>& spans) {
    const size_t d = a.cols();
    for (const Span& s : spans)
        if (s.begin >= s.end || s.end > a.rows()) throw DataError("pool_spans: empty or out-of-range span");
    auto out = make_op({a.node()}, spans.size(), d);
    for (size_t i = 0; i < spans.size(); ++i) {
        const double inv = 1.0 / static_cast<double>(spans[i].length());
        for (size_t t = spans[i].begin; t < spans[i].end; ++t)
            for (size_t j = 0; j < d; ++j) out->val[i * d + j] += a.value()[t * d + j] * inv;
    }
    if (out->requires_grad)
        out->backward_fn = [spans, d](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (size_t i = 0; i < spans.size(); ++i) {
                const double inv = 1.0 / static_cast<double>(spans[i].length());
                for (size_t t = spans[i].begin; t < spans[i].end; ++t)
                    for (size_t j = 0; j < d; ++j) pa.grad[t * d + j] += self.grad[i * d + j] * inv;
            }
        };
    return Tensor(out);
}

Tensor broadcast_spans(const Tensor& g, const std::vector<Span>& spans, size_t n) {
    const size_t d = g.cols();
    if (spans.size() != g.rows()) throw NumericError("broadcast_spans: span/row mismatch");
    for (const Span& s : spans)
        if (s.end > n) throw NumericError("broadcast_spans: span outside target length");
    auto out = make_op({g.node()}, n, d);
    for (size_t i = 0; i < spans.size(); ++i)
        for (size_t t = spans[i].begin; t < spans[i].end; ++t)
            std::copy(g.value().data() + i * d, g.value().data() + (i + 1) * d, out->val.data() + t * d);
    if (out->requires_grad)
        out->backward_fn = [spans, d](Node& self) {
            Node& pg = *self.parents[0];
            pg.ensure_grad();
            for (size_t i = 0; i < spans.size(); ++i)
                for (size_t t = spans[i].begin; t < spans[i].end; ++t)
                    for (size_t j = 0; j < d; ++j) pg.grad[i * d + j] += self.grad[t * d + j];
        };
    return Tensor(out);
}

Tensor masked_mean_rows(const Tensor& a, const std::vector<uint8_t>& mask) {
    if (mask.size() != a.rows()) throw NumericError("masked_mean_rows: mask length mismatch");
    size_t cnt = 0;
    for (uint8_t m : mask) cnt += (m != 0);
    if (cnt == 0) throw DataError("masked_mean_rows: mask selects no rows");
    const size_t d = a.cols();
    auto out = make_op({a.node()}, 1, d);
    const double inv = 1.0 / static_cast<double>(cnt);
    for (size_t t = 0; t < a.rows(); ++t) {
        if (mask[t] == 0) continue;
        for (size_t j = 0; j < d; ++j) out->val[j] += a.value()[t * d + j] * inv;
    }
    if (out->requires_grad)
        out->backward_fn = [mask, inv, d](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (size_t t = 0; t < mask.size(); ++t) {
                if (mask[t] == 0) continue;
                for (size_t j = 0; j < d; ++j) pa.grad[t * d + j] += self.grad[j] * inv;
            }
        };
    return Tensor(out);
}

Tensor gather_cols(const Tensor& a, const std::vector<int32_t>& col_per_row) {
    if (col_per_row.size() != a.rows()) throw NumericError("gather_cols: index length mismatch");
    const size_t c = a.cols();
    for (int32_t j : col_per_row)
        if (j < 0 || static_cast<size_t>(j) >= c) throw NumericError("gather_cols: column out of range");
    auto out = make_op({a.node()}, a.rows(), 1);
    for (size_t i = 0; i < a.rows(); ++i) out->val[i] = a.value()[i * c + static_cast<size_t>(col_per_row[i])];
    if (out->requires_grad)
        out->backward_fn = [col_per_row, c](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (size_t i = 0; i < col_per_row.size(); ++i)
                pa.grad[i * c + static_cast<size_t>(col_per_row[i])] += self.grad[i];
        };
    return Tensor(out);
}

Tensor sum_all(const Tensor& a) {
    auto out = make_op({a.node()}, 1, 1);
    double s = 0.0;
    for (double v : a.value()) s += v;
    out->val[0] = s;
    if (out->requires_grad)
        out->backward_fn = [](Node& self) {
            Node& pa = *self.parents[0];
            pa.ensure_grad();
            for (double& g : pa.grad) g += self.grad[0];
        };
    return Tensor(out);
}

Tensor mean_all(const Tensor& a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.size())); }

bool all_finite(const Tensor& a) {
    for (double v : a.value())
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace kgxrec::nn
