#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "kgxrec/rng.hpp"
#include "kgxrec/span.hpp"

namespace kgxrec::nn {

// Reverse-mode autodiff over dense row-major float64 matrices. Every value is
// 2-D; scalars are 1x1. Ops build a tape of nodes; backward() runs the tape in
// reverse topological order. Parameters are leaf tensors with requires_grad
// set; their gradients accumulate until zero_grad().
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(size_t rows, size_t cols, bool requires_grad = false);
    static Tensor full(size_t rows, size_t cols, double value, bool requires_grad = false);
    static Tensor from(size_t rows, size_t cols, std::vector<double> data, bool requires_grad = false);
    static Tensor randn(size_t rows, size_t cols, double stddev, Rng& rng, bool requires_grad = true);

    bool defined() const { return n_ != nullptr; }
    size_t rows() const;
    size_t cols() const;
    size_t size() const { return rows() * cols(); }

    const std::vector<double>& value() const;
    std::vector<double>& value();
    const std::vector<double>& grad() const;
    std::vector<double>& grad();

    double at(size_t r, size_t c) const;
    double& at(size_t r, size_t c);
    double scalar() const;  // value of a 1x1 tensor

    bool requires_grad() const;
    void zero_grad();

    // Runs the tape from this scalar node; `seed` is dL/dthis.
    void backward(double seed = 1.0) const;

    // Identity for shared-node detection (parameter registries, optimizers).
    const void* node_id() const;

    struct Node;
    explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}
    const std::shared_ptr<Node>& node() const { return n_; }

private:
    std::shared_ptr<Node> n_;
};

// --- elementwise / shape ---
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_rowvec(const Tensor& a, const Tensor& row);  // row is 1 x cols
Tensor transpose(const Tensor& a);
Tensor slice_cols(const Tensor& a, size_t c0, size_t c1);
Tensor concat_cols(const std::vector<Tensor>& parts);

// --- dense algebra ---
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor dot_rows(const Tensor& a, const Tensor& b);  // 1xd . 1xd -> 1x1

// --- nonlinearities / normalization ---
Tensor gelu(const Tensor& a);
// Row softmax of (a + add_mask); the mask is a constant, same shape as `a`.
Tensor softmax_rows(const Tensor& a, const std::vector<double>* add_mask = nullptr);
Tensor log_softmax_rows(const Tensor& a);
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

// --- gather / pooling ---
Tensor embedding_rows(const Tensor& table, const std::vector<int32_t>& ids);
Tensor pool_spans(const Tensor& a, const std::vector<Span>& spans);              // means, m x d
Tensor broadcast_spans(const Tensor& g, const std::vector<Span>& spans, size_t n);  // n x d, zero off-span
Tensor masked_mean_rows(const Tensor& a, const std::vector<uint8_t>& mask);      // 1 x d
Tensor gather_cols(const Tensor& a, const std::vector<int32_t>& col_per_row);    // n x 1

// --- reductions ---
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);

bool all_finite(const Tensor& a);

}  // namespace kgxrec::nn
