#pragma once

// Independent reference implementations used as oracles. Plain loops over raw
// row-major buffers; they share no code with the kernels they audit.

#include <cmath>
#include <cstddef>
#include <vector>

#include "kgxrec/attention.hpp"

namespace testing::oracle {

using Mat = std::vector<double>;  // row-major

inline Mat matmul(const Mat& a, size_t m, size_t k, const Mat& b, size_t n) {
    Mat c(m * n, 0.0);
    for (size_t i = 0; i < m; ++i)
        for (size_t l = 0; l < k; ++l)
            for (size_t j = 0; j < n; ++j) c[i * n + j] += a[i * k + l] * b[l * n + j];
    return c;
}

// Multi-head scaled dot-product attention evaluated directly. `allowed`, when
// non-null, restricts each row's softmax support to the given key set (the
// restricted-softmax reading of the -inf mask).
inline Mat attention(const Mat& xq, size_t nq, const Mat& xkv, size_t nk, size_t d,
                     const Mat& wq, const Mat& wk, const Mat& wv, const Mat& wo, size_t heads,
                     const std::vector<std::vector<bool>>* allowed = nullptr) {
    const size_t dk = d / heads;
    Mat q = matmul(xq, nq, d, wq, d);
    Mat k = matmul(xkv, nk, d, wk, d);
    Mat v = matmul(xkv, nk, d, wv, d);
    Mat concat(nq * d, 0.0);
    for (size_t h = 0; h < heads; ++h) {
        const size_t off = h * dk;
        for (size_t i = 0; i < nq; ++i) {
            std::vector<double> scores(nk, 0.0);
            for (size_t j = 0; j < nk; ++j) {
                double s = 0.0;
                for (size_t l = 0; l < dk; ++l) s += q[i * d + off + l] * k[j * d + off + l];
                scores[j] = s / std::sqrt(static_cast<double>(dk));
            }
            double mx = -1e300;
            for (size_t j = 0; j < nk; ++j)
                if (allowed == nullptr || (*allowed)[i][j]) mx = std::max(mx, scores[j]);
            double sum = 0.0;
            std::vector<double> w(nk, 0.0);
            for (size_t j = 0; j < nk; ++j) {
                if (allowed != nullptr && !(*allowed)[i][j]) continue;
                w[j] = std::exp(scores[j] - mx);
                sum += w[j];
            }
            for (size_t j = 0; j < nk; ++j) {
                if (w[j] == 0.0) continue;
                const double weight = w[j] / sum;
                for (size_t l = 0; l < dk; ++l) concat[i * d + off + l] += weight * v[j * d + off + l];
            }
        }
    }
    return matmul(concat, nq, d, wo, d);
}

inline std::vector<std::vector<bool>> allowed_from_mask(const kgxrec::attn::ComponentMask& mask) {
    std::vector<std::vector<bool>> allowed(mask.size, std::vector<bool>(mask.size, false));
    for (size_t i = 0; i < mask.size; ++i)
        for (size_t j = 0; j < mask.size; ++j) allowed[i][j] = !mask.blocked(i, j);
    return allowed;
}

inline Mat pool(const Mat& x, size_t d, const std::vector<kgxrec::Span>& spans) {
    Mat out(spans.size() * d, 0.0);
    for (size_t i = 0; i < spans.size(); ++i) {
        for (size_t t = spans[i].begin; t < spans[i].end; ++t)
            for (size_t j = 0; j < d; ++j) out[i * d + j] += x[t * d + j];
        for (size_t j = 0; j < d; ++j) out[i * d + j] /= static_cast<double>(spans[i].length());
    }
    return out;
}

inline Mat gather_add(const Mat& comp, const Mat& x, size_t /*n*/, size_t d,
                      const std::vector<kgxrec::Span>& spans) {
    Mat out = x;
    for (size_t i = 0; i < spans.size(); ++i)
        for (size_t t = spans[i].begin; t < spans[i].end; ++t)
            for (size_t j = 0; j < d; ++j) out[t * d + j] += comp[i * d + j];
    return out;
}

// Masked-mean + projection + dot evaluation of the rating head.
inline double rating(const Mat& x, size_t n, size_t d, const std::vector<uint8_t>& user_mask,
                     const std::vector<uint8_t>& item_mask, const Mat& wu, const Mat& wv) {
    auto pooled = [&](const std::vector<uint8_t>& mask) {
        std::vector<double> mean(d, 0.0);
        size_t count = 0;
        for (size_t t = 0; t < n; ++t) {
            if (mask[t] == 0) continue;
            ++count;
            for (size_t j = 0; j < d; ++j) mean[j] += x[t * d + j];
        }
        for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(count);
        return mean;
    };
    std::vector<double> u = pooled(user_mask), v = pooled(item_mask);
    std::vector<double> up(d, 0.0), vp(d, 0.0);
    for (size_t l = 0; l < d; ++l)
        for (size_t j = 0; j < d; ++j) {
            up[j] += u[l] * wu[l * d + j];
            vp[j] += v[l] * wv[l * d + j];
        }
    double r = 0.0;
    for (size_t j = 0; j < d; ++j) r += up[j] * vp[j];
    return r;
}

}  // namespace testing::oracle
