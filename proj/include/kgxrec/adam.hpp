#pragma once

#include <cstdint>
#include <vector>

#include "kgxrec/tensor.hpp"

namespace kgxrec {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(std::vector<nn::Tensor> params, AdamConfig cfg);

    void step();       // consumes accumulated gradients
    void zero_grad();
    uint64_t steps() const { return t_; }

private:
    std::vector<nn::Tensor> params_;
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    uint64_t t_ = 0;
};

double global_grad_norm(const std::vector<nn::Tensor>& params);

// Scales gradients so the global norm is at most `max_norm`; returns the
// pre-clip norm. Never increases the norm.
double clip_gradients(std::vector<nn::Tensor>& params, double max_norm);

}  // namespace kgxrec
