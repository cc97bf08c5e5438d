#include "klab/profile.hpp"
#include "klab/weight.hpp"

#include <catch_amalgamated.hpp>
#include <cmath>

using namespace klab;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

TEST_CASE("profile evaluation") {
    auto m = KProfile::min1();
    CHECK(m(0.5) == 0.5);
    CHECK(m(3.0) == 1.0);
    CHECK_THAT(KProfile::power(0.5, 2.0)(4.0), WithinRel(4.0, 1e-15));
    CHECK_THAT(std::exp(m.log_at(-800.0)), WithinAbs(0.0, 1e-300));
    CHECK_THAT(m.log_at(-800.0), WithinRel(-800.0, 1e-15));
    CHECK(KProfile()(2.0) == 0.0);
}

TEST_CASE("quasi-concavity") {
    CHECK(check_quasiconcave(KProfile::min1()).ok);
    CHECK(check_quasiconcave(KProfile::power(1.0)).ok);
    auto bad = KProfile::from_exponents({{1.0, 1.0}, {2.0, std::pow(2.0, 1.5)}}, {1.5}, 1.0, 0.0);
    auto r = check_quasiconcave(bad);
    CHECK_FALSE(r.ok);
    REQUIRE(r.segment);
    CHECK(*r.segment == 1);
    // decreasing profile
    CHECK_FALSE(check_quasiconcave(KProfile::piecewise_power({{1.0, 2.0}, {2.0, 1.0}})).ok);
    // quasi-concave but not concave: t on (0,1), 1 on (1,4), (t/4) on (4,8), 2 afterwards
    auto qc = KProfile::piecewise_power({{1.0, 1.0}, {4.0, 1.0}, {8.0, 2.0}});
    CHECK(check_quasiconcave(qc).ok);
}

TEST_CASE("K from rearrangement") {
    auto k = K_from_rearrangement(Rearrangement::indicator(1.0));
    for (double t : {0.25, 1.0, 7.0}) CHECK_THAT(k(t), WithinRel(std::min(t, 1.0), 1e-15));
    auto p = K_from_rearrangement(Rearrangement::power(0.5));
    for (double t : {1e-4, 1.0, 9.0}) CHECK_THAT(p(t), WithinRel(2.0 * std::sqrt(t), 1e-14));
    CHECK(K_from_rearrangement(Rearrangement()).is_zero());
    CHECK_THROWS_AS(K_from_rearrangement(Rearrangement::power(1.0)), PreconditionError);
    // log piece after the first piece: f* = 1 on (0,1), 1/u afterwards -> K = 1 + ln t
    Rearrangement lg({{0.0, 1.0, 1.0, 0.0, 0.0}, {1.0, kInf, 0.0, 1.0, 1.0}});
    CHECK_THAT(K_from_rearrangement(lg)(std::exp(2.0)), WithinRel(3.0, 1e-14));
    CHECK(check_quasiconcave(K_from_rearrangement(lg)).ok);
}

TEST_CASE("realize rearrangement") {
    auto f = realize_rearrangement(KProfile::min1());
    CHECK(f(0.5) == 1.0);
    CHECK(f(2.0) == 0.0);
    CHECK(realize_rearrangement(KProfile::power(1.0))(123.0) == 1.0);
    auto g = realize_rearrangement(KProfile::power(0.5, 2.0));
    CHECK_THAT(g(4.0), WithinRel(0.5, 1e-15));
    CHECK_THROWS_AS(realize_rearrangement(KProfile::piecewise_power({{1.0, 2.0}, {2.0, 1.0}})), PreconditionError);
    CHECK_THROWS_AS(realize_rearrangement(KProfile::piecewise_power({{1.0, 1.0}}, 0.0, 0.0)), PreconditionError);
}

TEST_CASE("round trip on concave profiles is exact at nodes") {
    std::vector<std::vector<std::pair<double, double>>> family = {
        {{1.0, 1.0}},
        {{0.1, 0.1}, {1.0, 0.5}, {10.0, 1.0}},
        {{1e-3, 1e-3}, {1.0, 0.1}, {1e3, 1.0}, {1e6, 2.0}},
    };
    for (const auto& nodes : family) {
        auto phi = KProfile::piecewise_power(nodes);
        auto back = K_from_rearrangement(realize_rearrangement(phi));
        for (auto [t, k] : nodes) CHECK_THAT(back(t), WithinRel(k, 1e-13));
    }
}

TEST_CASE("least concave majorant stays within the band") {
    auto phi = KProfile::piecewise_power({{1.0, 1.0}, {4.0, 1.0}, {8.0, 2.0}});
    auto back = K_from_rearrangement(realize_rearrangement(phi));
    for (double t : GridSpec{1e-6, 1e6, 16}.points()) {
        double r = back(t) / phi(t);
        CHECK(r >= 1.0 - 1e-12);
        CHECK(r <= 2.0);
    }
    CHECK(check_quasiconcave(back).ok);
}

TEST_CASE("truncation split") {
    auto f = Rearrangement::indicator(1.0);
    auto [a0, a1] = truncation_split(f, 1.0);
    CHECK(a0.is_zero());
    CHECK(a1(0.5) == 1.0);
    auto [b0, b1] = truncation_split(f, 0.5);
    CHECK(b0(0.5) == 0.5);
    CHECK(b1(0.5) == 0.5);
    CHECK(b0(2.0) == 0.0);

    auto p = Rearrangement::power(0.5);
    auto [c0, c1] = truncation_split(p, 1.0);
    CHECK_THAT(c0(0.25), WithinRel(1.0, 1e-15));
    CHECK(c0(4.0) == 0.0);
    CHECK(c1(0.25) == 1.0);
    CHECK_THAT(c1(4.0), WithinRel(0.5, 1e-15));

    // K additivity
    auto k = K_from_rearrangement(p);
    for (double lambda : {0.01, 0.3, 1.0, 17.0}) {
        auto [f0, f1] = truncation_split(p, lambda);
        auto k0 = K_from_rearrangement(f0), k1 = K_from_rearrangement(f1);
        for (double v : GridSpec{1e-6, 1e6, 8}.points())
            CHECK_THAT(k0(v) + k1(v), WithinRel(k(v), 1e-12));
    }
}

TEST_CASE("profile and rearrangement literals") {
    CHECK(parse_profile("min1")(3.0) == 1.0);
    CHECK_THAT(parse_profile(" power( 0.5 )")(4.0), WithinRel(2.0, 1e-15));
    auto pl = parse_profile("powerlog(0.5,0,-0.25)");
    CHECK_THROWS_AS(parse_profile("powerlog(0.5,0,-1)"), ParseError);
    CHECK_THAT(pl(std::exp(2.0)), WithinRel(std::exp(1.0) * std::pow(3.0, -0.25), 1e-12));
    CHECK_THAT(parse_profile("piecewise[(1,1),(4,2)]")(2.0), WithinRel(std::sqrt(2.0), 1e-14));
    CHECK_THROWS_AS(parse_profile("piecewise[(1,2),(2,1)]"), ParseError);
    CHECK_THROWS_AS(parse_profile("triangle"), ParseError);
    CHECK_THROWS_AS(parse_profile("power(2)"), ParseError);
    CHECK(parse_rearrangement("indicator(2)")(1.0) == 1.0);
    auto st = parse_rearrangement("step[(1,3),(2,1)]");
    CHECK(st(0.5) == 3.0);
    CHECK(st(1.5) == 1.0);
    CHECK(st(5.0) == 0.0);
    CHECK_THROWS_AS(parse_rearrangement("step[(1,1),(2,3)]"), ParseError);
}

TEST_CASE("dual profile") {
    auto k = KProfile::piecewise_power({{0.1, 0.1}, {1.0, 0.5}, {10.0, 1.0}});
    auto d = k.dual();
    for (double t : {1e-3, 0.05, 0.3, 2.0, 40.0}) CHECK_THAT(d(t), WithinRel(t * k(1.0 / t), 1e-13));
    CHECK(check_quasiconcave(d).ok);
    auto m = KProfile::min1().dual();
    CHECK(m(0.5) == 0.5);
    CHECK(m(2.0) == 1.0);
}
