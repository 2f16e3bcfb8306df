#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "dde/errors.hpp"
#include "dde/vae.hpp"

using namespace dde;
namespace fs = std::filesystem;

namespace {

// Independent forward pass reading the documented parameter layout:
// W1 [n x h], b1, Wmu [h x d], bmu, Wlv [h x d], blv, W3 [d x h], b3, W4 [h x n], b4.
struct Oracle {
    std::size_t n, d, h;
    std::vector<double> p;

    const double* at(int block) const {
        const std::size_t sizes[] = {n * h, h, h * d, d, h * d, d, d * h, h, h * n, n};
        std::size_t off = 0;
        for (int i = 0; i < block; ++i) off += sizes[i];
        return p.data() + off;
    }
    static std::vector<double> affine(const std::vector<double>& in, const double* w, const double* b, std::size_t out) {
        std::vector<double> y(out);
        for (std::size_t j = 0; j < out; ++j) {
            long double s = b[j];
            for (std::size_t i = 0; i < in.size(); ++i) s += static_cast<long double>(in[i]) * w[i * out + j];
            y[j] = static_cast<double>(s);
        }
        return y;
    }
    std::pair<std::vector<double>, std::vector<double>> encode(const std::vector<double>& x) const {
        auto h1 = affine(x, at(0), at(1), h);
        for (double& v : h1) v = std::tanh(v);
        return {affine(h1, at(2), at(3), d), affine(h1, at(4), at(5), d)};
    }
    std::vector<double> decode(const std::vector<double>& z) const {
        auto h2 = affine(z, at(6), at(7), h);
        for (double& v : h2) v = std::tanh(v);
        auto out = affine(h2, at(8), at(9), n);
        for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
        return out;
    }
};

std::vector<double> uniform_vec(std::mt19937_64& g, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(g);
    return v;
}

}  // namespace

TEST_CASE("zero weights") {
    const VaeModel m = VaeModel::zeros({6, 2, 8});
    const auto e = m.encode(std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    CHECK(e.mu == std::vector<double>{0.0, 0.0});
    CHECK(e.logvar == std::vector<double>{0.0, 0.0});
    CHECK(m.decode(std::vector<double>{3.0, -1.0}) == Genome(6, 0.5));
}

TEST_CASE("forward pass matches an independent matrix recomputation") {
    std::mt19937_64 g(1);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t k = static_cast<std::size_t>(rep);
        const VaeShape s{3 + k * 4, 1 + k, 5 + k * 7};
        const VaeModel m(s, 100 + rep);
        const Oracle o{s.input_dim, s.latent_dim, s.hidden_dim, {m.params().begin(), m.params().end()}};
        const auto x = uniform_vec(g, s.input_dim);
        const auto [mu, lv] = o.encode(x);
        const auto e = m.encode(x);
        for (std::size_t i = 0; i < s.latent_dim; ++i) {
            CHECK(std::abs(e.mu[i] - mu[i]) < 1e-10);
            CHECK(std::abs(e.logvar[i] - lv[i]) < 1e-10);
        }
        const auto want = o.decode(mu);
        const auto got = m.decode(mu);
        for (std::size_t i = 0; i < s.input_dim; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-10);
        CHECK(m.reconstruct(x) == m.decode(e.mu));
        CHECK(m.encode(x).mu == e.mu);
    }
}

TEST_CASE("kl closed form against a Monte-Carlo estimate") {
    CHECK(kl_standard_normal(std::vector<double>{1.0}, std::vector<double>{0.0}) == doctest::Approx(0.5).epsilon(1e-15));
    const double ln4 = std::log(4.0);
    CHECK(kl_standard_normal(std::vector<double>{0.0}, std::vector<double>{ln4}) ==
          doctest::Approx(0.5 * (4 - 1 - ln4)).epsilon(1e-15));
    CHECK(0.5 * (4 - 1 - ln4) == doctest::Approx(0.80685).epsilon(1e-5));

    // KL(q || p) = E_q[log q(z) - log p(z)] for q = N(mu, s^2), p = N(0, 1).
    std::mt19937_64 g(2);
    std::normal_distribution<double> nd;
    for (auto [mu, lv] : {std::pair{1.0, 0.0}, std::pair{0.0, ln4}, std::pair{-0.7, -1.2}}) {
        const double s = std::exp(lv / 2);
        double acc = 0;
        const int N = 400000;
        for (int i = 0; i < N; ++i) {
            const double e = nd(g), z = mu + s * e;
            acc += (-0.5 * e * e - std::log(s)) - (-0.5 * z * z);
        }
        CHECK(kl_standard_normal(std::vector<double>{mu}, std::vector<double>{lv}) ==
              doctest::Approx(acc / N).epsilon(0.02));
    }
}

TEST_CASE("kl non-negative and zero only at the standard normal") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-3, 3);
    CHECK(kl_standard_normal(std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)) == 0.0);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> mu(3), lv(3);
        for (double& v : mu) v = u(g);
        for (double& v : lv) v = u(g);
        CHECK(kl_standard_normal(mu, lv) > 0.0);
    }
    CHECK(kl_standard_normal(std::vector<double>{1e-3, 0.0}, std::vector<double>{0.0, 0.0}) > 0.0);
    CHECK(kl_standard_normal(std::vector<double>{0.0}, std::vector<double>{1e-3}) > 0.0);
}

TEST_CASE("loss terms") {
    const VaeModel z = VaeModel::zeros({4, 2, 3});
    const std::vector<double> half(4, 0.5), eps{0.3, -0.2};
    const auto f = z.forward(half, eps);
    CHECK(f.loss.total == 0.0);
    CHECK(f.loss.kl == 0.0);
    CHECK(f.z == std::vector<double>{0.3, -0.2});
    const auto f2 = z.forward(std::vector<double>{0.0, 1.0, 0.5, 0.5}, eps);
    CHECK(f2.loss.recon == doctest::Approx(0.5));
}

TEST_CASE("gradient check") {
    std::mt19937_64 g(4);
    std::normal_distribution<double> nd;
    SUBCASE("zero-weight net") {
        const VaeModel m = VaeModel::zeros({6, 2, 8});
        CHECK(gradient_check(m, uniform_vec(g, 6), std::vector<double>{0.4, -1.1}, 1e-5) < 1e-5);
    }
    SUBCASE("random nets, full loss and reconstruction only") {
        const VaeModel m({6, 2, 8}, 11);
        const auto x = uniform_vec(g, 6);
        const std::vector<double> eps{nd(g), nd(g)};
        CHECK(gradient_check(m, x, eps, 1e-6) < 1e-4);
        CHECK(gradient_check(m, x, eps, 1e-6, 0.0) < 1e-4);
        for (int rep = 0; rep < 10; ++rep) {
            const VaeShape s{2 + g() % 8, 1 + g() % 4, 2 + g() % 10};
            const VaeModel r(s, g());
            std::vector<double> e(s.latent_dim);
            for (double& v : e) v = nd(g);
            CHECK(gradient_check(r, uniform_vec(g, s.input_dim), e, 1e-6) < 1e-4);
        }
    }
    SUBCASE("a corrupted gradient is detected") {
        const VaeModel m({6, 2, 8}, 12);
        const double err = gradient_check(m, uniform_vec(g, 6), std::vector<double>{0.1, 0.2}, 1e-6, 1.0,
                                          [](std::span<double> grad) { grad[3] *= 1.5; });
        CHECK(err > 1e-2);
    }
    CHECK_THROWS_AS(gradient_check(VaeModel::zeros({2, 1, 2}), std::vector<double>{0, 0}, std::vector<double>{0}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("gradient reports the forward loss") {
    const VaeModel m({5, 2, 6}, 9);
    const std::vector<double> x{0.1, 0.7, 0.3, 0.9, 0.5}, eps{0.2, -0.4};
    std::vector<double> g1(m.param_count());
    const auto t = m.gradient(x, eps, g1);
    CHECK(t.total == doctest::Approx(m.forward(x, eps).loss.total).epsilon(1e-14));
}

TEST_CASE("training") {
    std::mt19937_64 g(5);
    std::vector<Genome> data;
    for (int i = 0; i < 200; ++i) data.push_back(uniform_vec(g, 8));

    SUBCASE("epochs = 0 leaves weights unchanged") {
        VaeModel m({8, 3, 16}, 1);
        const VaeModel before = m;
        Rng r(1);
        const auto rep = m.train(data, 0, r);
        CHECK(m == before);
        CHECK(rep.final_loss == rep.initial_loss);
        CHECK(rep.kl_term >= 0.0);
    }
    SUBCASE("loss decreases over 50 epochs") {
        VaeModel m({8, 3, 16}, 1);
        Rng r(2);
        const auto rep = m.train(data, 50, r);
        CHECK(rep.final_loss < rep.initial_loss);
        CHECK(rep.kl_term >= 0.0);
        for (double p : m.params()) CHECK(std::isfinite(p));
    }
    SUBCASE("deterministic given seeds") {
        VaeModel a({8, 3, 16}, 1), b({8, 3, 16}, 1);
        Rng ra(3), rb(3);
        a.train(data, 3, ra);
        b.train(data, 3, rb);
        CHECK(a == b);
    }
    SUBCASE("overfitting one genome lowers its reconstruction error") {
        VaeModel m({8, 2, 16}, 4);
        const std::vector<Genome> same(64, data[0]);
        Rng r(4);
        auto err = [&] {
            const auto x = m.reconstruct(data[0]);
            double s = 0;
            for (std::size_t i = 0; i < 8; ++i) s += (x[i] - data[0][i]) * (x[i] - data[0][i]);
            return s;
        };
        double prev = err();
        for (int e = 0; e < 5; ++e) {
            m.train(same, 1, r);
            const double now = err();
            CHECK(now < prev + 1e-6);
            prev = now;
        }
    }
    SUBCASE("dimension mismatch") {
        VaeModel m({8, 3, 16}, 1);
        Rng r(1);
        CHECK_THROWS_AS(m.train({Genome(7, 0.5)}, 1, r), DimensionError);
        CHECK_THROWS_AS(m.train({}, 1, r), std::invalid_argument);
    }
}

TEST_CASE("decoder outputs stay inside (0, 1)") {
    std::mt19937_64 g(6);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        const VaeModel m({10, 3, 12}, g());
        for (int i = 0; i < 100; ++i) {
            const auto out = m.decode(std::vector<double>{nd(g), nd(g), nd(g)});
            for (double v : out) CHECK((v > 0.0 && v < 1.0));
        }
    }
}

TEST_CASE("decoder file round trip and corruption") {
    const fs::path p = fs::temp_directory_path() / "dde_test_decoder.bin";
    const VaeModel m({20, 10, 32}, 3);
    const Decoder d = m.decoder();
    save_decoder(p, d);
    const Decoder back = load_decoder(p);
    CHECK(back == d);
    const std::vector<double> z{0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8, 0.9, 1.0};
    CHECK(back.decode(z) == m.decode(z));

    std::string bytes;
    {
        std::ifstream in(p, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    auto write_variant = [&](std::string b) {
        std::ofstream(p, std::ios::binary | std::ios::trunc) << b;
    };
    auto expect_format_error = [&](std::string b, const std::string& needle) {
        write_variant(std::move(b));
        try {
            load_decoder(p);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    std::string bad = bytes;
    bad[0] = 'X';
    expect_format_error(bad, "magic");
    bad = bytes;
    bad[8] = 2;
    expect_format_error(bad, "version");
    bad = bytes;
    bad[40] ^= 0x10;
    expect_format_error(bad, "checksum");
    expect_format_error(bytes.substr(0, bytes.size() - 20), "payload size");
    expect_format_error(bytes.substr(0, 10), "truncated header");
    CHECK_THROWS_AS(load_decoder("/nonexistent/decoder.bin"), IoError);
}
