#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "ucso/rng.hpp"

using namespace ucso;

TEST_CASE("equal seeds give bit-identical draw sequences") {
    RngStream a(123), b(123);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.uniform() == b.uniform());
        CHECK(a.normal() == b.normal());
    }
}

TEST_CASE("different seeds give different sequences") {
    RngStream a(1), b(2);
    bool all_equal = true;
    for (int i = 0; i < 16; ++i) all_equal = all_equal && (a.uniform() == b.uniform());
    CHECK_FALSE(all_equal);
}

TEST_CASE("streams are copyable with value semantics") {
    RngStream a(7);
    a.uniform();
    RngStream b = a;  // snapshot of engine state
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("repeated same-tag child derivations yield distinct streams") {
    RngStream root(42);
    std::set<std::uint64_t> ids;
    std::vector<double> firsts;
    for (int i = 0; i < 64; ++i) {
        RngStream c = root.child("transition");
        ids.insert(c.id());
        firsts.push_back(c.uniform());
    }
    CHECK(ids.size() == 64);
    std::set<double> uniq(firsts.begin(), firsts.end());
    CHECK(uniq.size() == 64);
}

TEST_CASE("the stream tree is a pure function of the root seed") {
    RngStream r1(99), r2(99);
    for (int i = 0; i < 8; ++i) {
        RngStream c1 = r1.child("grad");
        RngStream c2 = r2.child("grad");
        CHECK(c1.id() == c2.id());
        RngStream g1 = c1.child(std::uint64_t(i));
        RngStream g2 = c2.child(std::uint64_t(i));
        CHECK(g1.id() == g2.id());
        CHECK(g1.uniform() == g2.uniform());
    }
}

TEST_CASE("child derivation does not disturb the parent engine") {
    RngStream a(5), b(5);
    (void)a.child("x");
    (void)a.child(std::uint64_t(3));
    // b derives the same children so its counter matches a's
    (void)b.child("x");
    (void)b.child(std::uint64_t(3));
    for (int i = 0; i < 50; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("named and numeric child tags agree through hash_name") {
    RngStream a(11), b(11);
    CHECK(a.child("alpha").id() == b.child(hash_name("alpha")).id());
}

TEST_CASE("uniform stays in [0,1) and uniform_index in range") {
    RngStream r(3);
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        std::size_t j = r.uniform_index(5);
        CHECK(j < 5);
        seen.insert(j);
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("categorical_log matches its weights empirically") {
    RngStream r(17);
    // unnormalized probabilities 1 : 2 : 3
    std::vector<double> logw = {std::log(1.0), std::log(2.0), std::log(3.0)};
    const int n = 60000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i) ++counts[r.categorical_log(logw)];
    const double p[3] = {1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0};
    for (int j = 0; j < 3; ++j) {
        double se = std::sqrt(p[j] * (1 - p[j]) / n);
        CHECK(std::abs(double(counts[j]) / n - p[j]) < 4.0 * se);
    }
}

TEST_CASE("categorical_log is invariant to a common log-weight shift") {
    std::vector<double> a = {0.1, 0.9, -0.4};
    std::vector<double> b = {0.1 - 700.0, 0.9 - 700.0, -0.4 - 700.0};
    RngStream r1(21), r2(21);
    for (int i = 0; i < 500; ++i) CHECK(r1.categorical_log(a) == r2.categorical_log(b));
}

TEST_CASE("categorical_log rejects all-zero weights") {
    RngStream r(1);
    std::vector<double> logw(3, -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS((void)r.categorical_log(logw), std::runtime_error);
}

TEST_CASE("categorical_log never picks a zero-probability slot") {
    RngStream r(9);
    std::vector<double> logw = {0.0, -std::numeric_limits<double>::infinity(), 0.5};
    for (int i = 0; i < 2000; ++i) CHECK(r.categorical_log(logw) != 1);
}
