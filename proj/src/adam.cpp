#include "kgxrec/adam.hpp"

#include <cmath>

#include "kgxrec/error.hpp"

namespace kgxrec {

Adam::Adam(std::vector<nn::Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    if (cfg_.lr < 0.0) throw ConfigError("adam: learning rate must be >= 0");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        auto& val = params_[i].value();
        const auto& g = params_[i].grad();
        auto& m = m_[i];
        auto& v = v_[i];
        for (size_t j = 0; j < val.size(); ++j) {
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            val[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

double global_grad_norm(const std::vector<nn::Tensor>& params) {
    double sq = 0.0;
    for (const auto& p : params)
        for (double g : p.grad()) sq += g * g;
    return std::sqrt(sq);
}

double clip_gradients(std::vector<nn::Tensor>& params, double max_norm) {
    if (max_norm <= 0.0) throw ConfigError("clip_gradients: max norm must be > 0");
    const double norm = global_grad_norm(params);
    if (norm > max_norm) {
        const double s = max_norm / norm;
        for (auto& p : params)
            for (double& g : p.grad()) g *= s;
    }
    return norm;
}

}  // namespace kgxrec
