#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nids/error.hpp"
#include "nids/neuralcore.hpp"
#include "support.hpp"

using namespace nids;
using nids::testing::rows_of;

namespace {

MlpModel identity_layer(std::size_t n) {
    DenseLayer l;
    l.spec = {n, n, Activation::Identity};
    l.weights = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) l.weights(i, i) = 1.0;
    l.bias.assign(n, 0.0);
    return MlpModel::from_layers({l});
}

}  // namespace

TEST_CASE("activations") {
    CHECK(activate(Activation::Relu, std::vector<double>{-1.0, 2.0}) == std::vector<double>{0.0, 2.0});
    CHECK(activate(Activation::Selu, std::vector<double>{0.0})[0] == 0.0);
    CHECK(activate(Activation::Selu, std::vector<double>{1.0})[0] == doctest::Approx(kSeluLambda));
    const auto sm = activate(Activation::Softmax, std::vector<double>{0.0, 0.0});
    CHECK(sm[0] == doctest::Approx(0.5));
    CHECK(sm[1] == doctest::Approx(0.5));
    CHECK_THROWS(activate(Activation::Relu, std::vector<double>{NAN}));
    CHECK_THROWS(activate(Activation::Softmax, std::vector<double>{1.0, INFINITY}));
    CHECK_THROWS(activate(Activation::Softmax, std::vector<double>{}));
}

TEST_CASE("softmax normalization and shift invariance") {
    Rng rng(3);
    std::normal_distribution<double> n(0.0, 5.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(1 + static_cast<std::size_t>(t % 7));
        for (auto& v : x) v = n(rng);
        const auto p = activate(Activation::Softmax, x);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
        for (double v : p) CHECK((v > 0.0 && v <= 1.0));
        auto shifted = x;
        const double c = n(rng) * 10;
        for (auto& v : shifted) v += c;
        const auto q = activate(Activation::Softmax, shifted);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - q[i]) < 1e-9);
    }
}

TEST_CASE("losses") {
    const std::vector<double> y{0.3, -1.0};
    CHECK(loss(LossKind::Mse, y, y).value == 0.0);
    CHECK(loss(LossKind::Mse, std::vector<double>{0, 0}, std::vector<double>{1, 1}).value == doctest::Approx(1.0));
    CHECK(loss(LossKind::CrossEntropy, std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}).value ==
          doctest::Approx(std::log(2.0)));
    CHECK(std::isfinite(loss(LossKind::CrossEntropy, std::vector<double>{0.0, 1.0}, std::vector<double>{1, 0}).value));
    CHECK_THROWS(loss(LossKind::Mse, std::vector<double>{1}, std::vector<double>{1, 2}));
}

TEST_CASE("forward pass") {
    const auto id = identity_layer(3);
    const auto x = rows_of({{1, -2, 3}, {0.5, 0, -1}});
    CHECK(id.predict(x) == x);
    CHECK_THROWS_AS(id.predict(Matrix(1, 2)), DataError);

    auto m = MlpModel::create({{4, 3, Activation::Relu, 0.5, 0.0}, {3, 2, Activation::Identity}}, 1);
    const auto in = testing::random_matrix(5, 4, 2);
    CHECK(m.predict(in) == m.predict(in));
    m.set_mode(Mode::Train);
    Rng a(9), b(9), c(10);
    const auto fa = forward(m, in, &a);
    const auto fb = forward(m, in, &b);
    const auto fc = forward(m, in, &c);
    CHECK(fa.output() == fb.output());
    CHECK_FALSE(fa.output() == fc.output());
    CHECK_THROWS(forward(m, in, nullptr));
}

TEST_CASE("inverted dropout preserves the expected output") {
    auto m = identity_layer(4);
    m.mutable_layers()[0].spec.dropout_rate = 0.3;
    m.set_mode(Mode::Train);
    const auto x = rows_of({{1.0, 2.0, -3.0, 0.5}});
    Rng rng(11);
    std::vector<double> sum(4, 0.0);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto out = forward(m, x, &rng).output();
        for (std::size_t c = 0; c < 4; ++c) sum[c] += out(0, c);
    }
    for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(sum[c] / n - x(0, c)) < 0.02 * std::abs(x(0, c)));
}

TEST_CASE("backward: zero gradient, closed form, stale cache") {
    auto m = MlpModel::create({{3, 2, Activation::Relu}, {2, 2, Activation::Selu}}, 4);
    const auto x = testing::random_matrix(4, 3, 5);
    const auto cache = forward(m, x, nullptr);
    const auto g = backward(m, cache, Matrix(4, 2));
    for (auto block : g.blocks())
        for (double v : block) CHECK(v == 0.0);

    // Single linear layer with MSE: dL/dw = 2/n X^T (Xw - y).
    DenseLayer l;
    l.spec = {2, 1, Activation::Identity};
    l.weights = rows_of({{0.5, -1.0}});
    l.bias = {0.0};
    const auto lin = MlpModel::from_layers({l});
    const auto xs = rows_of({{1, 2}, {3, -1}, {0, 1}});
    const auto ys = rows_of({{1}, {0}, {2}});
    const auto lc = forward(lin, xs, nullptr);
    const auto bl = batch_loss(LossKind::Mse, lc.output(), ys);
    const auto lg = backward(lin, lc, bl.grad);
    for (std::size_t j = 0; j < 2; ++j) {
        double expect = 0.0;
        for (std::size_t r = 0; r < 3; ++r) {
            const double pred = 0.5 * xs(r, 0) - 1.0 * xs(r, 1);
            expect += 2.0 / 3.0 * xs(r, j) * (pred - ys(r, 0));
        }
        CHECK(lg.weights[0](0, j) == doctest::Approx(expect).epsilon(1e-12));
    }

    m.mutable_layers();
    CHECK_THROWS_AS(backward(m, cache, Matrix(4, 2)), std::logic_error);
}

TEST_CASE("gradient check on random small models") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto r = testing::gradient_check(testing::random_grad_case(seed));
        CAPTURE(seed);
        CHECK(r.worst_relative < 1e-4);
    }
}

TEST_CASE("fused softmax cross-entropy matches the generic path") {
    auto m = MlpModel::create({{3, 4, Activation::Selu}, {4, 3, Activation::Softmax}}, 8);
    const auto x = testing::random_matrix(5, 3, 1);
    const auto t = one_hot({0, 2, 1, 1, 0}, 3);
    const auto cache = forward(m, x, nullptr);
    const auto bl = batch_loss(LossKind::CrossEntropy, cache.output(), t);
    const auto generic = backward(m, cache, bl.grad);
    Matrix pre(5, 3);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 3; ++c) pre(r, c) = (cache.output()(r, c) - t(r, c)) / 5.0;
    const auto fused = backward_from_preactivation(m, cache, pre);
    const auto gb = generic.blocks();
    const auto fb = fused.blocks();
    for (std::size_t b = 0; b < gb.size(); ++b)
        for (std::size_t i = 0; i < gb[b].size(); ++i) CHECK(gb[b][i] == doctest::Approx(fb[b][i]).epsilon(1e-9));
}

TEST_CASE("adam") {
    std::vector<double> w{1.0, -2.0};
    std::vector<double> zero{0.0, 0.0};
    AdamState s;
    adam_step(s, {std::span<double>(w)}, {std::span<const double>(zero)});
    CHECK(w == std::vector<double>{1.0, -2.0});
    CHECK(s.step == 1);

    std::vector<double> p{0.0};
    std::vector<double> g{1.0};
    AdamState first;
    adam_step(first, {std::span<double>(p)}, {std::span<const double>(g)});
    CHECK(p[0] == doctest::Approx(-0.001).epsilon(1e-6));

    std::vector<double> q{3.0};
    AdamState st;
    double prev = q[0] * q[0];
    for (int i = 0; i < 2; ++i) {
        std::vector<double> grad{2.0 * q[0]};
        adam_step(st, {std::span<double>(q)}, {std::span<const double>(grad)});
        CHECK(q[0] * q[0] < prev);
        prev = q[0] * q[0];
    }
    std::vector<double> bad{1.0, 2.0, 3.0};
    CHECK_THROWS(adam_step(st, {std::span<double>(bad)}, {std::span<const double>(bad)}));
}

TEST_CASE("early stopping") {
    EarlyStopping es(6);
    CHECK(es.observe(1.0));
    CHECK(es.observe(0.5));
    int extra = 0;
    while (!es.stop()) {
        CHECK_FALSE(es.observe(0.5));
        ++extra;
    }
    CHECK(extra == 6);
    CHECK(es.best_epoch() == 2);
    CHECK(es.best_loss() == 0.5);
}

TEST_CASE("training reduces loss, returns the best epoch and is deterministic") {
    Matrix x(200, 2);
    std::vector<int> labels(200);
    Rng rng(4);
    std::normal_distribution<double> n(0.0, 0.5);
    for (std::size_t i = 0; i < 200; ++i) {
        labels[i] = static_cast<int>(i % 2);
        x(i, 0) = n(rng) + (labels[i] ? 2.0 : -2.0);
        x(i, 1) = n(rng);
    }
    TrainConfig cfg;
    cfg.max_epochs = 30;
    cfg.seed = 5;
    cfg.loss = LossKind::CrossEntropy;
    const auto spec = std::vector<LayerSpec>{{2, 8, Activation::Relu}, {8, 2, Activation::Softmax}};
    const auto a = train(MlpModel::create(spec, 1), x, one_hot(labels, 2), cfg);
    const auto b = train(MlpModel::create(spec, 1), x, one_hot(labels, 2), cfg);
    CHECK(a.model.same_parameters(b.model));
    CHECK(a.history.val_loss == b.history.val_loss);
    CHECK(a.history.train_loss.back() < a.history.initial_train_loss);
    CHECK(a.model.mode() == Mode::Infer);

    const auto& vl = a.history.val_loss;
    const auto best = std::min_element(vl.begin(), vl.end());
    CHECK(a.history.best_epoch == static_cast<std::size_t>(best - vl.begin()) + 1);

    CHECK_THROWS_AS(train(MlpModel::create(spec, 1), Matrix(0, 2), Matrix(0, 2), cfg), DataError);
    TrainConfig bad;
    bad.val_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("early stopping keeps the best parameters, not the last") {
    // A huge learning rate makes validation loss bounce around.
    Matrix x = testing::random_matrix(60, 3, 2);
    Matrix y = testing::random_matrix(60, 2, 3);
    TrainConfig cfg;
    cfg.max_epochs = 40;
    cfg.patience = 3;
    cfg.learning_rate = 0.5;
    cfg.seed = 1;
    const auto vx = testing::random_matrix(20, 3, 4);
    const auto vy = testing::random_matrix(20, 2, 5);
    const auto r = train(MlpModel::create({{3, 6, Activation::Relu}, {6, 2, Activation::Identity}}, 2), x, y, vx, vy, cfg);
    const auto& vl = r.history.val_loss;
    const double best = *std::min_element(vl.begin(), vl.end());
    CHECK(evaluate_loss(r.model, vx, vy, LossKind::Mse) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("model JSON round trip and version guard") {
    const auto m = MlpModel::create({{4, 3, Activation::Selu, 0.1, 0.2}, {3, 4, Activation::Identity}}, 3);
    const auto j = m.to_json();
    CHECK(j.at("format_version") == 1);
    const auto back = MlpModel::from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.same_parameters(m));
    auto skew = j;
    skew["format_version"] = 2;
    CHECK_THROWS_AS(MlpModel::from_json(skew), FormatError);
}

TEST_CASE("initialization scale follows the activation") {
    const auto m = MlpModel::create({{400, 300, Activation::Selu}, {300, 200, Activation::Relu}}, 1);
    auto var = [](const Matrix& w) {
        double s = 0, s2 = 0;
        for (double v : w.data()) {
            s += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(w.data().size());
        return s2 / n - (s / n) * (s / n);
    };
    CHECK(var(m.layers()[0].weights) == doctest::Approx(1.0 / 400).epsilon(0.05));  // LeCun normal
    CHECK(var(m.layers()[1].weights) == doctest::Approx(2.0 / 300).epsilon(0.05));  // He uniform
}
