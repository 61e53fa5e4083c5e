#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <mmg/mmg.hpp>

namespace {

// Independent scalar evaluation of the transform: Pascal-triangle binomials
// and a literal translation of the channel formula.
double oracle_channel(const std::vector<double>& g, std::size_t t, std::size_t k,
                      std::size_t tau, const std::array<double, 2>& scales) {
    std::vector<std::vector<long long>> pascal(k + 1);
    for (std::size_t n = 0; n <= k; ++n) {
        pascal[n].assign(n + 1, 1);
        for (std::size_t j = 1; j < n; ++j)
            pascal[n][j] = pascal[n - 1][j - 1] + pascal[n - 1][j];
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + k <= tau; ++i) {
        double diff = 0.0;
        for (std::size_t j = 0; j <= k; ++j) {
            const double sign = ((k - j) % 2 == 0) ? 1.0 : -1.0;
            diff += sign * static_cast<double>(pascal[k][j]) * g[t + i + j];
        }
        acc += diff;
    }
    const double fact = (k == 2) ? 2.0 : 1.0;
    double c = acc / (fact * static_cast<double>(tau + 1 - k));
    if (k > 0) {
        c = 0.5 + c / (2.0 * scales[k - 1]);
        c = std::clamp(c, 0.0, 1.0);
    }
    return c;
}

mmg::VideoTensor reverse_time(const mmg::VideoTensor& v) {
    mmg::VideoTensor out(v.frames, v.height, v.width, v.channels);
    for (std::size_t t = 0; t < v.frames; ++t)
        for (std::size_t y = 0; y < v.height; ++y)
            for (std::size_t x = 0; x < v.width; ++x)
                for (std::size_t c = 0; c < v.channels; ++c)
                    out.at(t, y, x, c) = v.at(v.frames - 1 - t, y, x, c);
    return out;
}

}  // namespace

TEST_CASE("to_grayscale averages the channels") {
    mmg::VideoTensor v(1, 1, 2, 3);
    v.at(0, 0, 0, 0) = 0.3;
    v.at(0, 0, 0, 1) = 0.6;
    v.at(0, 0, 0, 2) = 0.9;
    v.at(0, 0, 1, 0) = 0.5;
    v.at(0, 0, 1, 1) = 0.5;
    v.at(0, 0, 1, 2) = 0.5;
    const mmg::VideoTensor g = mmg::to_grayscale(v);
    CHECK(g.channels == 1);
    CHECK(g.at(0, 0, 0, 0) == Catch::Approx(0.6).margin(1e-12));
    CHECK(g.at(0, 0, 1, 0) == Catch::Approx(0.5).margin(1e-12));

    // single-channel input passes through untouched
    const mmg::VideoTensor same = mmg::to_grayscale(g);
    CHECK(same.values == g.values);

    mmg::VideoTensor zero(1, 2, 2, 3);
    const mmg::VideoTensor gz = mmg::to_grayscale(zero);
    for (double x : gz.values) CHECK(x == 0.0);

    mmg::VideoTensor two(1, 1, 1, 2);
    CHECK_THROWS_AS(mmg::to_grayscale(two), mmg::ShapeError);
}

TEST_CASE("taylor output keeps T minus tau frames") {
    mmg::ToyVideoParams tp;
    tp.frames = 12;
    const mmg::VideoTensor v = mmg::gen_toy_video("static", tp);
    mmg::TaylorParams p;
    p.tau = 4;
    const mmg::VideoTensor out = mmg::taylor_video(v, p);
    CHECK(out.frames == 8);
    CHECK(out.height == v.height);
    CHECK(out.width == v.width);
    CHECK(out.channels == 3);

    mmg::ToyVideoParams short_tp;
    short_tp.frames = 4;
    const mmg::VideoTensor shortv = mmg::gen_toy_video("static", short_tp);
    CHECK_THROWS_AS(mmg::taylor_video(shortv, p), mmg::ShapeError);

    mmg::TaylorParams bad;
    bad.tau = 1;
    CHECK_THROWS_AS(mmg::taylor_video(v, bad), mmg::ValidationError);
}

TEST_CASE("static input maps to mid-gray derivative channels") {
    mmg::ToyVideoParams tp;
    tp.frames = 9;
    tp.base = 0.37;
    const mmg::VideoTensor out = mmg::taylor_video(mmg::gen_toy_video("static", tp), {});
    for (std::size_t t = 0; t < out.frames; ++t)
        for (std::size_t y = 0; y < out.height; ++y)
            for (std::size_t x = 0; x < out.width; ++x) {
                REQUIRE(std::fabs(out.at(t, y, x, 0) - 0.37) <= 1e-12);
                REQUIRE(std::fabs(out.at(t, y, x, 1) - 0.5) <= 1e-12);
                REQUIRE(std::fabs(out.at(t, y, x, 2) - 0.5) <= 1e-12);
            }
}

TEST_CASE("linear ramp yields constant velocity and zero acceleration") {
    mmg::ToyVideoParams tp;
    tp.frames = 10;
    tp.base = 0.2;
    tp.beta = 0.05;
    const mmg::VideoTensor ramp = mmg::gen_toy_video("ramp", tp);
    const mmg::VideoTensor out = mmg::taylor_video(ramp, {});
    for (std::size_t t = 0; t < out.frames; ++t)
        for (std::size_t y = 0; y < out.height; ++y)
            for (std::size_t x = 0; x < out.width; ++x) {
                REQUIRE(std::fabs(out.at(t, y, x, 1) - (0.5 + 0.05 / 2.0)) <= 1e-12);
                REQUIRE(std::fabs(out.at(t, y, x, 2) - 0.5) <= 1e-12);
            }

    SECTION("time reversal negates the velocity channel") {
        const mmg::VideoTensor rev = mmg::taylor_video(reverse_time(ramp), {});
        for (std::size_t t = 0; t < rev.frames; ++t)
            REQUIRE(std::fabs(rev.at(t, 0, 0, 1) - (0.5 - 0.05 / 2.0)) <= 1e-12);
    }

    SECTION("scales divide the deviation from mid-gray") {
        mmg::TaylorParams p;
        p.scales = {5.0, 1.0};
        const mmg::VideoTensor scaled = mmg::taylor_video(ramp, p);
        REQUIRE(std::fabs(scaled.at(0, 0, 0, 1) - (0.5 + 0.05 / 10.0)) <= 1e-12);
    }

    SECTION("tiny scales clamp the channel") {
        mmg::TaylorParams p;
        p.scales = {1e-3, 1e-3};
        const mmg::VideoTensor clamped = mmg::taylor_video(ramp, p);
        CHECK(clamped.at(0, 0, 0, 1) == 1.0);
        const mmg::VideoTensor down = mmg::taylor_video(reverse_time(ramp), p);
        CHECK(down.at(0, 0, 0, 1) == 0.0);
    }
}

TEST_CASE("quadratic input reaches the acceleration channel") {
    mmg::ToyVideoParams tp;
    tp.frames = 10;
    tp.base = 0.1;
    tp.gamma = 0.005;
    const mmg::VideoTensor quad = mmg::gen_toy_video("quadratic", tp);

    mmg::TaylorParams p;
    const mmg::VideoTensor out = mmg::taylor_video(quad, p);
    // second difference of gamma*t^2 is exactly 2*gamma
    for (std::size_t t = 0; t < out.frames; ++t)
        REQUIRE(std::fabs(out.at(t, 0, 0, 2) - (0.5 + 0.005 / 2.0)) <= 1e-12);

    // velocity channel cross-checked against the scalar oracle
    std::vector<double> g(quad.frames);
    for (std::size_t t = 0; t < quad.frames; ++t) g[t] = quad.at(t, 0, 0, 0);
    for (std::size_t t = 0; t < out.frames; ++t)
        REQUIRE(std::fabs(out.at(t, 0, 0, 1) - oracle_channel(g, t, 1, p.tau, p.scales)) <=
                1e-12);

    SECTION("half scale doubles the deviation") {
        mmg::TaylorParams half;
        half.scales = {1.0, 0.5};
        const mmg::VideoTensor h = mmg::taylor_video(quad, half);
        REQUIRE(std::fabs(h.at(0, 0, 0, 2) - (0.5 + 0.005)) <= 1e-12);
    }
}

TEST_CASE("brightness shift moves only channel zero") {
    mmg::ToyVideoParams tp;
    tp.frames = 9;
    tp.height = 4;
    tp.width = 4;
    tp.base = 0.2;
    tp.dot_amp = 0.4;
    const mmg::VideoTensor v = mmg::gen_toy_video("moving-dot", tp);
    mmg::VideoTensor shifted = v;
    const double b = 0.15;
    for (double& x : shifted.values) x += b;

    const mmg::VideoTensor a = mmg::taylor_video(v, {});
    const mmg::VideoTensor s = mmg::taylor_video(shifted, {});
    for (std::size_t t = 0; t < a.frames; ++t)
        for (std::size_t y = 0; y < a.height; ++y)
            for (std::size_t x = 0; x < a.width; ++x) {
                REQUIRE(std::fabs(s.at(t, y, x, 0) - a.at(t, y, x, 0) - b) <= 1e-12);
                REQUIRE(std::fabs(s.at(t, y, x, 1) - a.at(t, y, x, 1)) <= 1e-12);
                REQUIRE(std::fabs(s.at(t, y, x, 2) - a.at(t, y, x, 2)) <= 1e-12);
            }
}

TEST_CASE("taylor matches the scalar oracle on random videos") {
    mmg::SplitMix64 rng(555);
    for (int inst = 0; inst < 3; ++inst) {
        mmg::VideoTensor v(8, 8, 8, 3);
        for (double& x : v.values) x = rng.next_double();
        mmg::TaylorParams p;
        p.tau = 2 + static_cast<std::size_t>(inst);
        p.scales = {0.5 + rng.next_double(), 0.5 + rng.next_double()};
        const mmg::VideoTensor out = mmg::taylor_video(v, p);
        REQUIRE(out.frames == 8 - p.tau);

        const mmg::VideoTensor g = mmg::to_grayscale(v);
        for (std::size_t y = 0; y < 8; ++y)
            for (std::size_t x = 0; x < 8; ++x) {
                std::vector<double> series(8);
                for (std::size_t t = 0; t < 8; ++t) series[t] = g.at(t, y, x, 0);
                for (std::size_t t = 0; t < out.frames; ++t)
                    for (std::size_t k = 0; k < 3; ++k)
                        REQUIRE(std::fabs(out.at(t, y, x, k) -
                                          oracle_channel(series, t, k, p.tau, p.scales)) <=
                                1e-12);
            }
    }
}
