#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "kgxrec/error.hpp"

using namespace kgxrec;
using namespace testing;
using nn::Tensor;

namespace {

Tensor random_param(size_t r, size_t c, nn::Rng& rng) { return Tensor::randn(r, c, 0.5, rng); }

// Scalar wrap: weighted sum against fixed coefficients, so every entry of the
// intermediate matters in the loss.
Tensor spread(const Tensor& t) {
    std::vector<double> coef(t.size());
    for (size_t i = 0; i < coef.size(); ++i) coef[i] = 0.3 + 0.1 * static_cast<double>(i % 7);
    return nn::sum_all(nn::mul(t, Tensor::from(t.rows(), t.cols(), coef)));
}

}  // namespace

TEST_CASE("matmul forward matches a plain triple loop") {
    nn::Rng rng(7);
    Tensor a = random_param(3, 4, rng), b = random_param(4, 2, rng);
    Tensor c = nn::matmul(a, b);
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 2; ++j) {
            double s = 0.0;
            for (size_t l = 0; l < 4; ++l) s += a.at(i, l) * b.at(l, j);
            CHECK(c.at(i, j) == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE("softmax rows sum to one and respect the additive mask") {
    nn::Rng rng(8);
    Tensor a = random_param(4, 5, rng);
    std::vector<double> mask(20, 0.0);
    mask[2] = -1e9;   // row 0, col 2
    mask[7] = -1e9;   // row 1, col 2
    Tensor p = nn::softmax_rows(a, &mask);
    for (size_t i = 0; i < 4; ++i) {
        double sum = 0.0;
        for (size_t j = 0; j < 5; ++j) sum += p.at(i, j);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(p.at(0, 2) < 1e-12);
    CHECK(p.at(1, 2) < 1e-12);
}

TEST_CASE("gradients of every primitive match finite differences") {
    nn::Rng rng(42);
    Tensor a = random_param(3, 4, rng);
    Tensor b = random_param(4, 3, rng);
    Tensor c = random_param(3, 4, rng);
    Tensor row = random_param(1, 4, rng);
    Tensor gain = Tensor::full(1, 4, 1.0, true);
    Tensor bias = Tensor::zeros(1, 4, true);
    std::vector<Span> spans{{0, 2}, {2, 3}};  // row 3 uncovered (marker-like)
    std::vector<uint8_t> mask{1, 0, 1};
    std::vector<int32_t> ids{2, 0, 1, 0};
    std::vector<int32_t> cols{1, 3, 0};
    std::vector<double> addmask(3 * 3, 0.0);
    addmask[1] = -1e9;

    struct Case {
        const char* name;
        std::function<Tensor()> forward;
    };
    std::vector<Case> cases = {
        {"matmul", [&] { return spread(nn::matmul(a, b)); }},
        {"add", [&] { return spread(nn::add(a, c)); }},
        {"sub", [&] { return spread(nn::sub(a, c)); }},
        {"mul", [&] { return spread(nn::mul(a, c)); }},
        {"scale", [&] { return spread(nn::scale(a, -1.7)); }},
        {"add_rowvec", [&] { return spread(nn::add_rowvec(a, row)); }},
        {"transpose", [&] { return spread(nn::transpose(a)); }},
        {"slice_cols", [&] { return spread(nn::slice_cols(a, 1, 3)); }},
        {"concat_cols", [&] { return spread(nn::concat_cols({a, c})); }},
        {"gelu", [&] { return spread(nn::gelu(a)); }},
        {"softmax_mask",
         [&] { return spread(nn::softmax_rows(nn::matmul(a, b), &addmask)); }},
        {"log_softmax", [&] { return spread(nn::log_softmax_rows(a)); }},
        {"layer_norm", [&] { return spread(nn::layer_norm(a, gain, bias)); }},
        {"embedding", [&] { return spread(nn::embedding_rows(a, ids)); }},
        {"pool_spans", [&] { return spread(nn::pool_spans(a, spans)); }},
        {"broadcast_spans", [&] { return spread(nn::broadcast_spans(nn::pool_spans(a, spans), spans, 3)); }},
        {"masked_mean", [&] { return spread(nn::masked_mean_rows(a, mask)); }},
        {"gather_cols", [&] { return spread(nn::gather_cols(a, cols)); }},
        {"dot_rows", [&] { return nn::dot_rows(row, nn::transpose(nn::slice_cols(b, 0, 1))); }},
        {"mean_all", [&] { return nn::mean_all(nn::gelu(a)); }},
    };

    for (auto& cs : cases) {
        CAPTURE(cs.name);
        std::vector<std::pair<std::string, Tensor>> params = {
            {"a", a}, {"b", b}, {"c", c}, {"row", row}, {"gain", gain}, {"bias", bias}};
        auto res = gradcheck(params, cs.forward);
        INFO(cs.name << " worst: " << res.worst);
        CHECK(res.max_rel_err < 1e-4);
    }
}

TEST_CASE("backward accumulates through shared subexpressions") {
    Tensor x = Tensor::from(1, 1, {3.0}, true);
    Tensor y = nn::mul(x, x);  // x^2, dy/dx = 2x = 6
    x.zero_grad();
    y.backward();
    CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("parameter gradients accumulate across backward calls until zeroed") {
    Tensor x = Tensor::from(1, 1, {2.0}, true);
    nn::scale(x, 3.0).backward();
    nn::scale(x, 3.0).backward();
    CHECK(x.grad()[0] == doctest::Approx(6.0));
    x.zero_grad();
    CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("shape errors are rejected") {
    Tensor a = Tensor::zeros(2, 3);
    Tensor b = Tensor::zeros(2, 3);
    CHECK_THROWS_AS(nn::matmul(a, b), NumericError);
    CHECK_THROWS_AS(nn::dot_rows(a, b), NumericError);
    CHECK_THROWS_AS(a.scalar(), NumericError);
    CHECK_THROWS_AS(nn::masked_mean_rows(a, {0, 0}), DataError);
    CHECK_THROWS_AS(nn::pool_spans(a, {{1, 1}}), DataError);
}
