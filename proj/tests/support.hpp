#pragma once

// Shared helpers for the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "nids/detector.hpp"
#include "nids/matrix.hpp"
#include "nids/neuralcore.hpp"
#include "nids/resample.hpp"

namespace nids::testing {

inline Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(std::vector<double>(r));
    return m;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double sd = 1.0) {
    Rng rng(seed);
    std::normal_distribution<double> n(0.0, sd);
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = n(rng);
    return m;
}

// Random small network (at most 50 parameters) with a matching target batch.
struct GradCase {
    MlpModel model;
    Matrix x;
    Matrix target;
    LossKind loss = LossKind::Mse;
    bool train_mode = false;
    std::uint64_t forward_seed = 0;
};

inline GradCase random_grad_case(std::uint64_t seed) {
    Rng rng(seed);
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    for (;;) {
        const std::size_t depth = pick(1, 2);
        std::vector<std::size_t> dims{pick(2, 4)};
        for (std::size_t l = 0; l < depth; ++l) dims.push_back(pick(2, 4));
        std::vector<LayerSpec> specs;
        const bool softmax_head = pick(0, 2) == 0;
        for (std::size_t l = 0; l < depth; ++l) {
            LayerSpec s;
            s.in_dim = dims[l];
            s.out_dim = dims[l + 1];
            const bool last = l + 1 == depth;
            if (last && softmax_head) {
                s.activation = Activation::Softmax;
            } else {
                const Activation choices[] = {Activation::Relu, Activation::Selu, Activation::Identity};
                s.activation = choices[pick(0, 2)];
            }
            specs.push_back(s);
        }
        GradCase c;
        c.model = MlpModel::create(specs, seed + 17);
        if (c.model.parameter_count() > 50) continue;
        // Spread biases away from zero so ReLU kinks are rarely within h.
        for (auto& layer : c.model.mutable_layers()) {
            for (auto& b : layer.bias) b += std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
        }
        const std::size_t n = pick(1, 4);
        c.x = random_matrix(n, dims.front(), seed * 31 + 1);
        c.target = Matrix(n, dims.back());
        if (softmax_head) {
            c.loss = LossKind::CrossEntropy;
            for (std::size_t r = 0; r < n; ++r) c.target(r, pick(0, dims.back() - 1)) = 1.0;
        } else {
            c.loss = LossKind::Mse;
            c.target = random_matrix(n, dims.back(), seed * 31 + 2);
        }
        // A third of the cases exercise noise and dropout with a replayed rng.
        if (pick(0, 2) == 0) {
            c.train_mode = true;
            auto& first = c.model.mutable_layers().front().spec;
            first.dropout_rate = 0.3;
            first.noise_sigma = 0.1;
            c.model.set_mode(Mode::Train);
            c.forward_seed = seed * 7 + 3;
        }
        return c;
    }
}

inline double case_loss(const GradCase& c) {
    Rng rng(c.forward_seed);
    const auto cache = forward(c.model, c.x, &rng);
    return batch_loss(c.loss, cache.output(), c.target).value;
}

struct GradCheckResult {
    double worst_relative = 0.0;
    std::size_t components = 0;
};

// Central differences (h = 1e-5) against backprop on every parameter.
// Relative error uses max(|a|, |n|, 1e-7) as the denominator.
inline GradCheckResult gradient_check(GradCase c) {
    Rng rng(c.forward_seed);
    const auto cache = forward(c.model, c.x, &rng);
    const auto bl = batch_loss(c.loss, cache.output(), c.target);
    const auto grads = backward(c.model, cache, bl.grad);
    std::vector<std::vector<double>> analytic;
    for (auto g : grads.blocks()) analytic.emplace_back(g.begin(), g.end());

    GradCheckResult res;
    const double h = 1e-5;
    auto blocks = c.model.parameter_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t i = 0; i < blocks[b].size(); ++i) {
            const double orig = blocks[b][i];
            blocks[b][i] = orig + h;
            const double up = case_loss(c);
            blocks[b][i] = orig - h;
            const double down = case_loss(c);
            blocks[b][i] = orig;
            const double numeric = (up - down) / (2 * h);
            const double a = analytic[b][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-7});
            res.worst_relative = std::max(res.worst_relative, std::abs(a - numeric) / denom);
            ++res.components;
        }
    }
    return res;
}

// SMOTE on a random two-point minority with k = 1; returns false if any
// synthetic leaves the componentwise segment box.
inline bool smote_segment_holds(std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    const std::size_t d = dim(rng);
    const Matrix minority = random_matrix(2, d, seed ^ 0xabcdefULL, 3.0);
    SmoteConfig cfg;
    cfg.k_neighbors = 1;
    cfg.seed = seed;
    const auto synth = smote_generate(minority, 20, cfg);
    for (std::size_t r = 0; r < synth.rows(); ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double lo = std::min(minority(0, c), minority(1, c));
            const double hi = std::max(minority(0, c), minority(1, c));
            if (synth(r, c) < lo || synth(r, c) > hi) return false;
        }
    }
    return synth.rows() == 20;
}

// Predicted-attack sets must shrink as alpha rises.
inline bool threshold_monotone(std::uint64_t seed) {
    Rng rng(seed);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> errors(200);
    for (auto& v : errors) v = e(rng);
    std::vector<double> ladder(25);
    for (auto& a : ladder) a = e(rng) * 2.0;
    // Include some alphas exactly equal to observed errors.
    for (std::size_t i = 0; i < 5; ++i) ladder.push_back(errors[i * 13]);
    std::sort(ladder.begin(), ladder.end());
    std::vector<bool> prev(errors.size(), true);
    for (double alpha : ladder) {
        for (std::size_t i = 0; i < errors.size(); ++i) {
            const bool attack = verdict_for(errors[i], alpha) == Verdict::Attack;
            if (attack && !prev[i]) return false;
            if (attack != (errors[i] > alpha)) return false;
            prev[i] = attack;
        }
    }
    return true;
}

}  // namespace nids::testing
