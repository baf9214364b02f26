#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "vqc/errors.hpp"
#include "vqc/optim.hpp"
#include "vqc/rng.hpp"

using namespace vqc;

TEST_CASE("SGD takes eta * grad steps") {
    Optimizer opt(OptimKind::SGD, 0.1, 1);
    std::vector<double> theta{1.0};
    opt.step(theta, std::vector{2.0});
    CHECK(theta[0] == doctest::Approx(0.8).epsilon(1e-15));

    opt.step(theta, std::vector{0.0});
    CHECK(theta[0] == doctest::Approx(0.8).epsilon(1e-15)); // zero gradient, no movement
}

TEST_CASE("SGD converges on the quadratic") {
    // f(theta) = theta^2, grad = 2 theta, eta = 0.1 contracts by 0.8 per step
    Optimizer opt(OptimKind::SGD, 0.1, 1);
    std::vector<double> theta{1.0};
    for (int t = 0; t < 60; ++t) {
        opt.step(theta, std::vector{2.0 * theta[0]});
    }
    CHECK(std::abs(theta[0]) < 1e-3);
}

TEST_CASE("Adam first step is bias-corrected") {
    // with g = 1: mhat = 1, vhat = 1, step = lr / (1 + eps)
    Optimizer opt(OptimKind::Adam, 0.01, 1);
    std::vector<double> theta{0.0};
    opt.step(theta, std::vector{1.0});
    CHECK(theta[0] == doctest::Approx(-0.01 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("Adam first-step direction is -sign(g) regardless of scale") {
    RngStream rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = rng.uniform_int(1, 8);
        std::vector<double> grad(n);
        for (auto& g : grad) {
            g = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform_int(-6, 4));
        }
        Optimizer opt(OptimKind::Adam, 0.01, n);
        std::vector<double> theta(n, 0.0);
        opt.step(theta, grad);
        for (int i = 0; i < n; ++i) {
            if (grad[i] == 0.0) {
                CHECK(theta[i] == 0.0);
            } else {
                CHECK(theta[i] * grad[i] < 0.0);
                if (std::abs(grad[i]) > 1e-4) { // above the eps floor the step is lr
                    CHECK(std::abs(theta[i]) == doctest::Approx(0.01).epsilon(1e-3));
                }
            }
        }
    }
}

TEST_CASE("AMSGrad and RMSProp reduce the quadratic") {
    for (const auto kind : {OptimKind::AMSGrad, OptimKind::RMSProp}) {
        Optimizer opt(kind, 0.05, 1);
        std::vector<double> theta{1.0};
        double best = 1.0;
        for (int t = 0; t < 200; ++t) {
            opt.step(theta, std::vector{2.0 * theta[0]});
            best = std::min(best, std::abs(theta[0]));
        }
        CHECK(best < 0.05);
    }
}

TEST_CASE("non-finite gradients halt with a numeric fault") {
    Optimizer opt(OptimKind::Adam, 0.01, 2);
    std::vector<double> theta{0.0, 0.0};
    CHECK_THROWS_AS(opt.step(theta, std::vector{1.0, std::nan("")}), NumericFault);
    CHECK_THROWS_AS(
        opt.step(theta, std::vector{std::numeric_limits<double>::infinity(), 0.0}),
        NumericFault);
}
