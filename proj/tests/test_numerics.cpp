#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include "ihlab/numerics.hpp"
#include "ihlab/rng.hpp"

using namespace ihlab;

namespace {
std::string test_data_dir() {
    const char* d = std::getenv("IHLAB_TEST_DATA");
    return d ? d : "tests";
}
}  // namespace

TEST_CASE("softmax: uniform on equal logits") {
    std::vector<double> l{0, 0, 0, 0};
    ProbVector p = softmax(l);
    for (double x : p.p) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax: frozen high-precision reference for [1,2,3]") {
    std::vector<double> l{1.0, 2.0, 3.0};
    ProbVector p = softmax(l);
    // Independent arbitrary-precision evaluation (50 digits), frozen.
    CHECK(p.p[0] == doctest::Approx(0.0900305731703804579980221).epsilon(1e-14));
    CHECK(p.p[1] == doctest::Approx(0.2447284710547976524729596).epsilon(1e-14));
    CHECK(p.p[2] == doctest::Approx(0.6652409557748218895290183).epsilon(1e-14));
}

TEST_CASE("softmax: shift invariance and normalization (property)") {
    RngStream rng = RngStream::derive(7, "softmax-prop");
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t n = 1 + rng.next_below(32);
        std::vector<double> l(n), shifted(n);
        const double s = (rng.next_double() - 0.5) * 200.0;
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = (rng.next_double() - 0.5) * 40.0;
            shifted[i] = l[i] + s;
        }
        ProbVector a = softmax(l), b = softmax(shifted);
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(a.p[i] - b.p[i]) < 1e-12);
            sum += a.p[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("softmax: error paths") {
    CHECK_THROWS_AS(softmax(std::vector<double>{}), std::invalid_argument);
    std::vector<double> bad{1.0, std::nan("")};
    CHECK_THROWS_AS(softmax(bad), std::invalid_argument);
    std::vector<double> inf{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(softmax(inf), std::invalid_argument);
}

TEST_CASE("entropy: one-hot is zero, uniform is ln|V|") {
    ProbVector onehot;
    onehot.p = {0, 0, 1, 0};
    CHECK(entropy(onehot) == 0.0);

    ProbVector uniform;
    uniform.p.assign(256, 1.0 / 256.0);
    CHECK(entropy(uniform) == doctest::Approx(5.545177444479562475337857).epsilon(1e-12));
}

TEST_CASE("entropy: frozen reference for (0.9, 0.05, 0.05)") {
    ProbVector p;
    p.p = {0.9, 0.05, 0.05};
    CHECK(entropy(p) == doctest::Approx(0.3943976914474427704482732).epsilon(1e-14));
}

TEST_CASE("entropy: bounds hold on random distributions (property)") {
    RngStream rng = RngStream::derive(11, "entropy-prop");
    for (int iter = 0; iter < 500; ++iter) {
        const std::size_t n = 2 + rng.next_below(128);
        std::vector<double> l(n);
        for (auto& x : l) x = (rng.next_double() - 0.5) * 30.0;
        ProbVector p = softmax(l);
        const double h = entropy(p);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(static_cast<double>(n)) + 1e-12);
    }
}

TEST_CASE("entropy: rejects invalid distributions") {
    ProbVector bad;
    bad.p = {0.5, 0.4};  // does not sum to 1
    CHECK_THROWS_AS(entropy(bad), std::invalid_argument);
    ProbVector neg;
    neg.p = {1.2, -0.2};
    CHECK_THROWS_AS(entropy(neg), std::invalid_argument);
}

TEST_CASE("entropy bound for near-deterministic distributions (top mass 1-eps)") {
    // Split H into the top-mass term and the tail term. The tail obeys
    // tail <= eps*(ln|V| + ln(1/eps)) exactly; the top term -(1-eps)ln(1-eps)
    // is bounded by eps, so the full entropy obeys the bound with +eps slack.
    const std::size_t V = 1000;
    for (double eps : {0.01, 0.005, 0.001, 0.0001}) {
        ProbVector p;
        p.p.assign(V, eps / static_cast<double>(V - 1));
        p.p[0] = 1.0 - eps;
        const double h = entropy(p);
        const double bound = eps * (std::log(static_cast<double>(V)) + std::log(1.0 / eps));
        const double top = -(1.0 - eps) * std::log(1.0 - eps);
        const double tail = h - top;
        CHECK(tail <= bound + 1e-9);
        CHECK(h <= bound + eps + 1e-9);
        CHECK(top <= eps);
    }
}

TEST_CASE("rng: determinism and label/seed sensitivity") {
    RngStream a = RngStream::derive(42, "train");
    RngStream b = RngStream::derive(42, "train");
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

    RngStream c = RngStream::derive(42, "train");
    RngStream d = RngStream::derive(42, "eval");
    int differ = 0;
    for (int i = 0; i < 1000; ++i)
        if (c.next() != d.next()) ++differ;
    CHECK(differ > 900);

    RngStream e = RngStream::derive(42, "x");
    RngStream f = RngStream::derive(43, "x");
    CHECK(e.next() != f.next());
}

TEST_CASE("rng: golden file (10000 draws, seed 42, label 'golden')") {
    std::ifstream in(test_data_dir() + "/golden/rng_seed42_golden.txt");
    REQUIRE(in.good());
    RngStream rng = RngStream::derive(42, "golden");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const std::uint64_t expected = std::strtoull(line.c_str(), nullptr, 16);
        CHECK(rng.next() == expected);
        ++n;
    }
    CHECK(n == 10000);
}

TEST_CASE("rng: next_below range and next_double range") {
    RngStream rng = RngStream::derive(3, "ranges");
    for (int i = 0; i < 1000; ++i) {
        CHECK(rng.next_below(7) < 7);
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK_THROWS_AS(rng.next_below(0), std::invalid_argument);
}
