#include <doctest.h>

#include "support/gradchecks.hpp"

#include "sqlgrpo/ad/checkpoint.hpp"
#include "sqlgrpo/ad/gradcheck.hpp"
#include "sqlgrpo/ad/ops.hpp"
#include "sqlgrpo/ad/optim.hpp"
#include "sqlgrpo/common/rng.hpp"
#include "sqlgrpo/common/text.hpp"

#include <cmath>
#include <filesystem>

using namespace sqlgrpo;
using namespace sqlgrpo::ad;

namespace {

Tensor random_tensor(Rng& rng, Shape shape, double scale = 1.0) {
    std::vector<double> v(numel(shape));
    for (auto& x : v) x = scale * rng.normal();
    return Tensor::constant(std::move(shape), std::move(v));
}

// Contracts an arbitrary output with fixed random weights so every output
// element reaches the scalar.
Tensor project(const Tensor& out, std::uint64_t seed) {
    Rng rng(seed);
    return sum(mul(out, random_tensor(rng, out.shape())));
}

} // namespace

TEST_CASE("d/dx (x*x) at 3 is 6") {
    Tensor x = Tensor::parameter({}, {3.0});
    backward(mul(x, x));
    CHECK(x.grad()[0] == 6.0);
}

TEST_CASE("softmax gradient sums to zero per row") {
    Rng rng(1);
    Tensor x = random_tensor(rng, {3, 5});
    x.node()->requires_grad = true;
    Tensor y = softmax(x);
    backward(project(y, 4));
    for (std::size_t r = 0; r < 3; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < 5; ++j) s += x.grad()[r * 5 + j];
        CHECK(std::abs(s) < 1e-12);
    }
}

TEST_CASE("gradients accumulate across backward passes and the tape is released") {
    Tensor w = Tensor::parameter({2}, {1.0, 2.0});
    Tensor y = sum(mul(w, w));
    backward(y);
    backward(sum(scale(w, 3.0)));
    CHECK(w.grad() == std::vector<double>{5.0, 7.0});
    CHECK(y.node()->inputs.empty());
    CHECK_FALSE(static_cast<bool>(y.node()->backward));
}

TEST_CASE("no-grad scope builds no graph") {
    Tensor w = Tensor::parameter({2}, {1.0, 2.0});
    NoGradGuard guard;
    Tensor y = sum(mul(w, w));
    CHECK_FALSE(y.requires_grad());
    CHECK(y.item() == 5.0);
}

TEST_CASE("finite-difference check of every op on random shapes") {
    for (const auto& c : testing::op_gradchecks(2024, 3)) {
        INFO(c.op);
        CHECK(c.worst_error < 1e-4);
    }
}

TEST_CASE("ops reject incompatible shapes") {
    CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), ShapeError);
    CHECK_THROWS_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({2})), ShapeError);
    CHECK_THROWS_AS(embedding(Tensor::zeros({2, 3}), {2}), ShapeError);
    CHECK_THROWS_AS(cross_entropy(Tensor::zeros({2, 3}), {0}), ShapeError);
    CHECK_THROWS_AS(causal_attention(Tensor::zeros({2, 3}), Tensor::zeros({2, 3}), Tensor::zeros({2, 3}), 2),
                    ShapeError);
    CHECK_THROWS_AS(Tensor::constant({2, 2}, {1.0}), ShapeError);
}

TEST_CASE("attention is causal") {
    Rng rng(3);
    Tensor q = random_tensor(rng, {4, 4}), k = random_tensor(rng, {4, 4}), v = random_tensor(rng, {4, 4});
    const Tensor before = causal_attention(q, k, v, 2);
    k.value()[3 * 4 + 1] += 5.0;
    v.value()[3 * 4 + 2] -= 5.0;
    const Tensor after = causal_attention(q, k, v, 2);
    for (std::size_t i = 0; i < 12; ++i) CHECK(before.value()[i] == after.value()[i]);
}

TEST_CASE("dropout: identity in eval mode, deterministic under a seed") {
    Rng rng(4);
    const Tensor x = random_tensor(rng, {5, 6});
    CHECK(dropout(x, 0.5, false, 1).value() == x.value());
    CHECK(dropout(x, 0.5, true, 1).value() == dropout(x, 0.5, true, 1).value());
    CHECK(dropout(x, 0.5, true, 1).value() != dropout(x, 0.5, true, 2).value());
}

TEST_CASE("adamw") {
    SUBCASE("zero gradient and zero decay leave parameters unchanged") {
        Tensor w = Tensor::parameter({3}, {1.0, -2.0, 0.5});
        w.grad();
        AdamW opt({w}, {});
        opt.step(0.1);
        CHECK(w.value() == std::vector<double>{1.0, -2.0, 0.5});
    }
    SUBCASE("one step on w^2 from 1 descends") {
        Tensor w = Tensor::parameter({}, {1.0});
        AdamW opt({w}, {});
        backward(mul(w, w));
        opt.step(0.1);
        CHECK(w.value()[0] * w.value()[0] < 1.0);
    }
    SUBCASE("decoupled decay with zero gradient") {
        Tensor w = Tensor::parameter({2}, {2.0, -4.0});
        w.grad();
        AdamWOptions o;
        o.weight_decay = 0.01;
        AdamW opt({w}, o);
        opt.step(0.1);
        CHECK(w.value()[0] == doctest::Approx(2.0 * (1.0 - 0.001)).epsilon(1e-15));
        CHECK(w.value()[1] == doctest::Approx(-4.0 * (1.0 - 0.001)).epsilon(1e-15));
    }
    SUBCASE("non-finite gradient aborts") {
        Tensor w = Tensor::parameter({1}, {1.0});
        w.grad()[0] = std::nan("");
        AdamW opt({w}, {});
        CHECK_THROWS_AS(opt.step(0.1), DivergenceError);
        CHECK(w.value()[0] == 1.0);
    }
}

TEST_CASE("lr schedule") {
    CHECK(lr_schedule(0, 0.1, 100) == 0.0);
    CHECK(lr_schedule(100, 0.1, 100) == 0.1);
    CHECK(lr_schedule(50, 0.1, 100) == doctest::Approx(0.05));
    CHECK(lr_schedule(500, 0.1, 100) == 0.1);
    CHECK(lr_schedule(0, 0.1, 0) == 0.1);
}

TEST_CASE("clip_grad_norm") {
    Tensor a = Tensor::parameter({2}, {0.0, 0.0});
    std::vector<Tensor> params{a};
    a.grad() = {0.3, 0.4};
    CHECK(clip_grad_norm(params, 1.0) == 1.0);
    CHECK(a.grad() == std::vector<double>{0.3, 0.4});
    a.grad() = {1.2, 1.6};
    CHECK(clip_grad_norm(params, 1.0) == doctest::Approx(0.5));
    CHECK(grad_norm(params) == doctest::Approx(1.0));
    a.grad() = {0.0, 0.0};
    CHECK(clip_grad_norm(params, 1.0) == 1.0);
    CHECK(a.grad() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("checkpoint round trip") {
    const auto path = std::filesystem::temp_directory_path() / "sqlgrpo_ckpt_test.bin";
    Checkpoint c;
    c.meta = {{"kind", "test"}, {"step", 3}};
    c.tensors.push_back({"w", {2, 2}, {1.0, -0.0, 1e-300, 3.5}});
    c.tensors.push_back({"s", {}, {42.0}});
    save_checkpoint(path.string(), c);
    const Checkpoint d = load_checkpoint(path.string());
    CHECK(d.meta == c.meta);
    REQUIRE(d.tensors.size() == 2);
    CHECK(d.get("w").data == c.tensors[0].data);
    CHECK(d.get("w").shape == Shape{2, 2});
    CHECK(d.get("s").shape.empty());
    CHECK_THROWS_AS(d.get("missing"), FormatError);
    Tensor wrong = Tensor::zeros({4});
    CHECK_THROWS_AS(restore_into(d, "w", wrong), FormatError);

    write_file(path.string(), "SGCK\x01");
    CHECK_THROWS_AS(load_checkpoint(path.string()), FormatError);
    std::filesystem::remove(path);
}
