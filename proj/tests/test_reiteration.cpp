#include "klab/reiteration.hpp"

#include <catch_amalgamated.hpp>
#include <cmath>

using namespace klab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ReiterationSpec zero_spec(const char* b = "one") {
    ReiterationSpec s;
    s.side = LimitingSide::zero;
    s.theta = 0.5;
    s.q = 1.0;
    s.b = parse_weight(b);
    s.w = WeightPair{1.0, parse_weight("log(-2,-2)"), 1.0, parse_weight("log(0,-3)")};
    return s;
}

std::vector<NamedProfile> suite() {
    std::vector<NamedProfile> out;
    for (const char* lit : {"min1", "piecewise[(0.1,0.1),(1,0.5),(10,1)]", "piecewise[(1e-3,1e-3),(1,0.05),(1e3,1)]",
                            "piecewise[(10,10)]"})
        out.push_back({lit, parse_profile(lit)});
    return out;
}

}  // namespace

TEST_CASE("reiterated weights") {
    auto s = zero_spec();
    // rho(1) = 1 / (1/2), b~ = rho^{1/2} b1
    CHECK_THAT(build_tilde_b(s)(1.0), WithinRel(std::sqrt(2.0), 1e-10));
    for (double t : {1e-4, 0.3, 7.0, 1e5}) {
        double rho = std::exp(s.log_index_x(std::log(t)));
        CHECK_THAT(build_tilde_b(s)(t), WithinRel(std::sqrt(rho) * s.w.b1(t), 1e-10));
    }

    // q = q1: the mass factor drops out
    ReiterationSpec s2 = s;
    s2.w.q0 = s2.w.q1 = s2.q = 2.0;
    for (double t : {0.01, 1.0, 100.0}) {
        double rho = std::exp(s2.log_index_x(std::log(t)));
        CHECK_THAT(build_tilde_b(s2)(t), WithinRel(std::sqrt(rho) * s2.w.b1(t), 1e-10));
    }

    // side one with closed-form heads: eta(1) = 1 / (1/2)
    ReiterationSpec h;
    h.side = LimitingSide::one;
    h.theta = 0.5;
    h.q = 1.0;
    h.w = WeightPair{1.0, parse_weight("log(-2,0)"), 1.0, parse_weight("log(-3,0)")};
    CHECK_THAT(build_hat_b(h)(1.0), WithinRel(std::sqrt(2.0), 1e-10));
    CHECK_THROWS(build_tilde_b(h));
}

TEST_CASE("flip duality of the reiterated weights") {
    auto s = zero_spec("log(1,-1)");
    s.theta = 0.3;
    auto f = flip(s);
    CHECK(f.side == LimitingSide::one);
    CHECK_THAT(f.theta, WithinRel(0.7, 1e-15));
    auto hat = build_hat_b(f);
    auto tilde = build_tilde_b(s);
    for (double t : GridSpec{1e-6, 1e6, 8}.points()) CHECK_THAT(hat(1.0 / t), WithinRel(tilde(t), 1e-9));
}

TEST_CASE("log-derivative check") {
    auto s = zero_spec();
    auto r = log_derivative_check(s);
    CHECK(r.pass);
    CHECK(r.lo >= 0.2);
    CHECK(r.hi <= 5.0);
    // for t > 1: rho = 2(1 + ln t) and b1/int = 2/(1 + ln t), ratio 1/2
    auto fine = log_derivative_check(s, {std::exp(2.0), std::exp(6.0), 8});
    CHECK_THAT(fine.lo, WithinRel(0.5, 1e-6));
    CHECK_THAT(fine.hi, WithinRel(0.5, 1e-6));

    auto scaled = s;
    scaled.w.b0 = parse_weight("mul(const(3),log(-2,-2))");
    auto r3 = log_derivative_check(scaled);
    CHECK_THAT(r3.lo, WithinRel(r.lo, 1e-9));
    CHECK_THAT(r3.hi, WithinRel(r.hi, 1e-9));

    auto same = s;
    same.w.b0 = same.w.b1;
    auto r0 = log_derivative_check(same);
    CHECK_FALSE(r0.pass);
    CHECK(r0.lo <= 1e-6);
}

TEST_CASE("reiteration hypotheses") {
    auto h = check_reiteration_hypotheses(zero_spec());
    CHECK(h.pass);
    CHECK(h.index_at_min <= 1e-2);
    CHECK(h.index_at_max >= 1e2);

    auto same = zero_spec();
    same.w.b0 = same.w.b1;
    auto bad = check_reiteration_hypotheses(same);
    CHECK_FALSE(bad.pass);
    CHECK(bad.failed.find("rho") != std::string::npos);
    CHECK_THROWS_AS(reiteration_check(same, suite()), HypothesisError);

    auto inf = zero_spec();
    inf.q = kInf;
    CHECK_THROWS_AS(inf.validate(), PreconditionError);
}

TEST_CASE("reiteration norms") {
    auto s = zero_spec();
    auto z = reiteration_norms(s, KProfile());
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);

    auto m = reiteration_norms(s, KProfile::min1());
    auto m3 = reiteration_norms(s, KProfile::min1().scaled(3.0));
    CHECK_THAT(m3.lhs, WithinRel(3.0 * m.lhs, 1e-8));
    CHECK_THAT(m3.rhs, WithinRel(3.0 * m.rhs, 1e-10));

    auto rep = reiteration_check(s, suite());
    CHECK(rep.skipped == 0);
    CHECK(rep.ratio_max / rep.ratio_min <= 1e3);

    // scaling b scales both sides alike
    auto rep2 = reiteration_check(zero_spec("const(5)"), suite());
    REQUIRE(rep2.rows.size() == rep.rows.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
        CHECK_THAT(rep2.rows[i].ratio, WithinRel(rep.rows[i].ratio, 1e-8));
}

TEST_CASE("Lorentz-Karamata norms") {
    auto chi = Rearrangement::indicator(1.0);
    CHECK_THAT(lorentz_karamata_norm(chi, LKSpec{1.0, 1.0, WeightExpr::one()}), WithinRel(1.0, 1e-12));
    CHECK_THAT(lorentz_karamata_norm(chi, LKSpec{kInf, 1.0, parse_weight("log(-2,0)")}), WithinRel(1.0, 1e-10));
    CHECK(lorentz_karamata_norm(Rearrangement(), LKSpec{kInf, 1.0, WeightExpr::one()}) == 0.0);
    // L^{2,2} = L^2
    auto p = Rearrangement::step({1.0}, {1.0, 0.0});
    CHECK_THAT(lorentz_karamata_norm(p, LKSpec{2.0, 2.0, WeightExpr::one()}), WithinRel(1.0, 1e-12));
}

TEST_CASE("L_{inf,q;b} as a limiting interpolation space") {
    auto b = parse_weight("log(-2,0)");
    auto chi = Rearrangement::indicator(1.0);
    auto r = lk_embedding_check({chi, chi.scaled(3.0), Rearrangement()}, 1.0, b);
    CHECK_THAT(r.rows[0].lk, WithinRel(1.0, 1e-9));
    CHECK_THAT(r.rows[0].interp, WithinRel(2.0, 1e-9));
    CHECK_THAT(r.rows[1].lk, WithinRel(3.0, 1e-9));
    CHECK_THAT(r.rows[1].interp, WithinRel(6.0, 1e-9));
    CHECK(r.rows[2].lk == 0.0);
    CHECK(r.rows[2].interp == 0.0);

    std::mt19937_64 rng(7);
    std::vector<Rearrangement> rand;
    for (int i = 0; i < 10; ++i) rand.push_back(random_rearrangement(rng, 6));
    auto rr = lk_embedding_check(rand, 1.0, b);
    CHECK(rr.ratio_min >= 1.0 - 1e-9);
    CHECK(rr.ratio_max <= 1e2);
}
