#include "doctest.h"

#include "admmdet/errors.hpp"
#include "admmdet/mimo_model.hpp"
#include "admmdet/psadmm.hpp"
#include "admmdet/psnet.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace admmdet;

namespace {
// A noiseless sample whose channel is so strong that every layer output sits
// on s to ~1e-8.
RealSample pinned_sample(std::uint64_t id) {
    auto smp = make_sample(SystemConfig{4, 2, 2, 1}, RngStream{600, id}, kNoiselessSnr);
    for (auto& v : smp.h.data()) v *= 1e4;
    smp.y = multiply(smp.h, smp.s);
    return smp;
}
} // namespace

TEST_CASE("w_transform examples") {
    std::vector<Vector> z1{{0.0}};
    const auto w = w_transform(1, Vector{0.3}, z1, Vector{0.1}, PenaltyParams{{0.0}, 1.0});
    CHECK(w[0] == doctest::Approx(0.4));
    std::vector<Vector> z2{{0.0}, {1.0}};
    CHECK(w_transform(1, Vector{0.5}, z2, Vector{0.0}, PenaltyParams{{0.5, 0.0}, 1.0}) == Vector{-3.0});
    CHECK_THROWS_AS(w_transform(1, Vector{0.5}, z1, Vector{0.0}, PenaltyParams{{1.0}, 1.0}), ParameterError);
    CHECK_THROWS_AS(w_transform(2, Vector{0.5}, z1, Vector{0.0}, PenaltyParams{{0.0}, 1.0}), DimensionError);
}

TEST_CASE("w_transform agrees with the sweep's pre-projection argument") {
    RandomEngine eng({41, 0});
    for (int trial = 0; trial < 100; ++trial) {
        const int q = 1 + static_cast<int>(eng.below(3));
        const auto th = PenaltyParams::proportional(q, eng.uniform(0.5, 3));
        Vector x(5), u(5);
        for (auto& v : x) v = 3 * eng.normal();
        for (auto& v : u) v = eng.normal();
        std::vector<Vector> z(q, Vector(5));
        for (auto& p : z)
            for (auto& v : p) v = eng.uniform(-1, 1);
        const int i = 1 + static_cast<int>(eng.below(static_cast<std::uint64_t>(q)));
        // independent evaluation of the plane-i argument
        Vector expect(5);
        for (int k = 0; k < 5; ++k) {
            double acc = x[k] + u[k];
            for (int j = 1; j <= q; ++j)
                if (j != i) acc -= std::ldexp(1.0, j - 1) * z[j - 1][k];
            expect[k] = th.plane_gain(i) * acc;
        }
        CHECK(oracle::max_abs_diff(w_transform(i, x, z, u, th), expect) <= 1e-12);
        Vector out(5);
        plane_argument(i, x, z, u, th, out);
        CHECK(out == w_transform(i, x, z, u, th));
    }
}

TEST_CASE("sgnlin") {
    CHECK(sgnlin(Vector{-3}) == Vector{-1});
    CHECK(sgnlin(Vector{0.4}) == Vector{0.4});
    RandomEngine eng({42, 0});
    Vector v(50);
    for (auto& x : v) x = 2 * eng.normal();
    CHECK(sgnlin(sgnlin(v)) == sgnlin(v));
    CHECK(sgnlin(v) == project_box(v));
}

TEST_CASE("psnet_forward equals detect_psadmm bit for bit") {
    for (int q = 1; q <= 3; ++q)
        for (std::uint64_t t = 0; t < 20; ++t) {
            const auto smp = make_sample(SystemConfig{6, 3, q, 1}, RngStream{43, t}, 10.0);
            const auto th = PenaltyParams::proportional(q, 0.5 + 0.1 * static_cast<double>(t));
            const auto net = psnet_forward(smp.y, smp.h, th, 15);
            const auto ref = detect_psadmm(smp.y, smp.h, th, 15);
            CHECK(net.x == ref.x);
            REQUIRE(net.layer_x.size() == 15);
            CHECK(net.layer_x.back() == net.x);
        }
    const auto smp = make_sample(SystemConfig{6, 3, 2, 1}, RngStream{43, 99}, 10.0);
    CHECK_THROWS_AS(psnet_forward(smp.y, smp.h, PenaltyParams::defaults(2), 0), ParameterError);
}

TEST_CASE("psnet noiseless recovery") {
    int ok = 0;
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto smp = make_sample(SystemConfig{16, 4, 2, 1}, RngStream{44, t}, kNoiselessSnr);
        ok += quantize(psnet_forward(smp.y, smp.h, PenaltyParams::defaults(2), 50).x, 2) == smp.s;
    }
    CHECK(ok == 50);
}

TEST_CASE("psnet_loss") {
    const auto th = PenaltyParams::defaults(2);
    std::vector<RealSample> batch{pinned_sample(0), pinned_sample(1)};
    CHECK(psnet_loss(batch, th, 20) < 1e-12);

    std::vector<RealSample> shifted{pinned_sample(2)};
    shifted[0].s[0] -= 1.0;
    CHECK(psnet_loss(shifted, th, 20) == doctest::Approx(1.0).epsilon(1e-6));

    std::vector<RealSample> noisy;
    for (std::uint64_t t = 0; t < 9; ++t) noisy.push_back(make_sample(SystemConfig{6, 2, 2, 1}, RngStream{45, t}, 3.0));
    const double l = psnet_loss(noisy, th, 10);
    CHECK(l > 0.0);
    std::reverse(noisy.begin(), noisy.end());
    CHECK(psnet_loss(noisy, th, 10) == doctest::Approx(l).epsilon(1e-12));
    CHECK_THROWS_AS(psnet_loss(std::span<const RealSample>{}, th, 10), DimensionError);
}

TEST_CASE("grad_fd on a quadratic surrogate is exact") {
    PenaltyParams th{{0.0}, 1.0};
    const PenaltyLoss f = [](const PenaltyParams& p) { return p.rho * p.rho; };
    const auto g = grad_fd(f, th, 1e-3);
    REQUIRE(g.size() == 2);
    CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g[0] == 0.0);
}

TEST_CASE("grad_fd shrinks near the boundary, then falls back, then fails") {
    // α at 0: central stencil never fits, one-sided forward stencil is used
    PenaltyParams th{{0.0}, 1.0};
    const PenaltyLoss f = [](const PenaltyParams& p) { return 3.0 * p.alpha[0] + p.rho; };
    const auto g = grad_fd(f, th, 1e-3);
    CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-9));
    // α just below its limit: halving makes the central stencil fit
    PenaltyParams near{{0.99 - 3e-4}, 1.0};
    const auto g2 = grad_fd(f, near, 1e-3);
    CHECK(g2[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK_THROWS_AS(grad_fd(f, PenaltyParams{{1.5}, 1.0}, 1e-3), ParameterError);
}

TEST_CASE("grad_fd of the loss w.r.t. rho matches a forward-difference oracle") {
    std::vector<RealSample> batch;
    for (std::uint64_t t = 0; t < 4; ++t) batch.push_back(make_sample(SystemConfig{4, 2, 2, 1}, RngStream{46, t}, 6.0));
    const PenaltyParams th{{0.2, 0.9}, 1.3};
    const double h = 1e-3;
    const auto g = grad_fd(th, batch, 8, h);
    auto bumped = th;
    const double step = h / 10 * std::max(1.0, th.rho);
    bumped.rho += step;
    const double oracle = (psnet_loss(batch, bumped, 8) - psnet_loss(batch, th, 8)) / step;
    CHECK(std::abs(g.back() - oracle) <= 1e-4 * std::max(1.0, std::abs(oracle)));
}

TEST_CASE("gradient vanishes when outputs already equal targets") {
    std::vector<RealSample> batch{pinned_sample(3), pinned_sample(4)};
    for (double v : grad_fd(PenaltyParams::defaults(2), batch, 20, 1e-3)) CHECK(std::abs(v) < 1e-8);
}

TEST_CASE("project_feasible") {
    auto p = project_feasible(PenaltyParams{{-1.0, 100.0}, 2.0});
    CHECK(p.alpha[0] == 0.0);
    CHECK(p.alpha[1] == doctest::Approx(0.99 * 4 * 2.0));
    CHECK(p.feasible());
    CHECK(project_feasible(PenaltyParams{{0.0}, 1e6}).rho == 1e3);
    CHECK(project_feasible(PenaltyParams{{0.0}, -5}).rho == 1e-3);
    const auto d = PenaltyParams::defaults(3);
    CHECK(project_feasible(d) == d);
}

TEST_CASE("train config validation") {
    CHECK_NOTHROW(TrainConfig::psnet_desk().validate());
    CHECK_NOTHROW(TrainConfig::psnet_full().validate());
    CHECK_NOTHROW(TrainConfig::hnet_desk().validate());
    CHECK_NOTHROW(TrainConfig::hnet_full().validate());
    CHECK(TrainConfig::psnet_full().m == 10000);
    CHECK(TrainConfig::psnet_full().epochs == 10000);
    CHECK(TrainConfig::hnet_full().m == 90000);
    CHECK(TrainConfig::hnet_full().batch == 1024);
    auto c = TrainConfig::psnet_desk();
    c.batch = c.m + 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = TrainConfig::psnet_desk();
    c.lr = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("train_psnet small run: loss drops, feasible every epoch, deterministic") {
    const DatasetDescriptor data{6, 2, 2, SnrPolicy::uniform(4, 12), 200, 47};
    TrainConfig cfg{200, 6, 50, 2e-2, 1e-3, 0.99, std::nullopt};
    std::vector<PenaltyParams> traj_a, traj_b;
    bool feasible = true;
    const auto a = train_psnet(data, 10, cfg, RngStream{48, 0}, [&](std::size_t, double, const PenaltyParams& th) {
        traj_a.push_back(th);
        feasible = feasible && th.feasible();
    });
    const auto b = train_psnet(data, 10, cfg, RngStream{48, 0},
                               [&](std::size_t, double, const PenaltyParams& th) { traj_b.push_back(th); });
    CHECK(feasible);
    CHECK(traj_a.size() == 6);
    CHECK(traj_a == traj_b);
    CHECK(a.theta == b.theta);
    CHECK(a.meta.loss_history == b.meta.loss_history);
    CHECK(a.meta.loss_history.size() == 7);
    CHECK(a.meta.final_loss < a.meta.initial_loss);
    CHECK(std::isfinite(a.meta.final_loss));
    const auto c = train_psnet(data, 10, cfg, RngStream{49, 0});
    CHECK(c.theta != a.theta);
}
