#include "klab/weight.hpp"

#include <catch_amalgamated.hpp>
#include <cmath>

using namespace klab;
using Catch::Matchers::WithinRel;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("weight parsing round trip") {
    for (const char* s : {"one", "const(2.5)", "log(0,-2)", "explog(0.5)", "mul(log(1,2),flip(explog(0.25)))",
                          "pow(log(-1,0.5),3)"}) {
        auto w = parse_weight(s);
        CHECK(w.to_string() == s);
        CHECK(parse_weight(w.to_string()).to_string() == s);
    }
    CHECK(parse_weight("  mul ( one , log( 1 , +2 ) ) ").to_string() == "mul(one,log(1,2))");
}

TEST_CASE("weight parse errors carry a column") {
    try {
        parse_weight("explog(1.5)");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.position() == 7);
        CHECK_THAT(std::string(e.what()), ContainsSubstring("column 8"));
    }
    CHECK_THROWS_AS(parse_weight("log(1,2"), ParseError);
    CHECK_THROWS_AS(parse_weight("foo(1)"), ParseError);
    CHECK_THROWS_AS(parse_weight("const(0)"), ParseError);
    CHECK_THROWS_AS(parse_weight("one extra"), ParseError);
    CHECK_THROWS_AS(parse_weight(""), ParseError);
}

TEST_CASE("weight evaluation") {
    auto w = parse_weight("log(1,-2)");
    CHECK_THAT(w(std::exp(-3.0)), WithinRel(4.0, 1e-14));
    CHECK_THAT(w(std::exp(1.0)), WithinRel(0.25, 1e-14));
    CHECK_THAT(parse_weight("flip(log(1,-2))")(std::exp(3.0)), WithinRel(4.0, 1e-14));
    CHECK_THAT(parse_weight("pow(explog(0.5),2)")(std::exp(4.0)), WithinRel(std::exp(4.0), 1e-13));
    CHECK_THAT(parse_weight("mul(const(3),log(0,1))")(std::exp(2.0)), WithinRel(9.0, 1e-14));
}

TEST_CASE("tail and head norms against antiderivatives") {
    // int_t^inf (1+ln u)^{-2} du/u = 1/(1+ln t)
    auto b = parse_weight("log(0,-2)");
    CHECK_THAT(tail_qnorm(b, 1.0, std::exp(1.0)), WithinRel(0.5, 1e-9));
    CHECK_THAT(head_qnorm(parse_weight("log(-2,0)"), 1.0, std::exp(-1.0)), WithinRel(0.5, 1e-9));
    // q = 2: (int (1+x)^{-4} dx)^{1/2} = 3^{-1/2}
    CHECK_THAT(tail_qnorm(parse_weight("log(0,-2)"), 2.0, 1.0), WithinRel(1.0 / std::sqrt(3.0), 1e-9));
    // int_0^inf exp(-sqrt x) dx = 2
    CHECK_THAT(tail_qnorm(parse_weight("pow(explog(0.5),-1)"), 1.0, 1.0), WithinRel(2.0, 1e-9));
    CHECK(std::isinf(tail_qnorm(parse_weight("log(0,-1)"), 1.0, 1.0)));
    CHECK(std::isinf(tail_qnorm(parse_weight("log(0,0.1)"), kInf, 1.0)));
    CHECK_THAT(tail_qnorm(parse_weight("log(0,-1)"), kInf, std::exp(1.0)), WithinRel(0.5, 1e-9));
}

TEST_CASE("asymptotics decide integrability") {
    auto w = parse_weight("mul(pow(explog(0.5),-1),log(0,5))");
    CHECK(w.asymptotics(DivergentEnd::at_infinity).integrable(1.0));
    CHECK_FALSE(parse_weight("mul(explog(0.5),log(0,-5))").asymptotics(DivergentEnd::at_infinity).integrable(1.0));
    CHECK(parse_weight("flip(log(0,-2))").asymptotics(DivergentEnd::at_zero).integrable(1.0));
    CHECK_FALSE(parse_weight("log(0,-2)").asymptotics(DivergentEnd::at_zero).integrable(1.0));
    // cancelling stretched terms fall back to the log power
    CHECK(parse_weight("mul(explog(0.5),mul(pow(explog(0.5),-1),log(0,-2)))")
              .asymptotics(DivergentEnd::at_infinity).integrable(1.0));
}

TEST_CASE("classification") {
    auto r = classify(parse_weight("log(0,-2)"), 1.0);
    CHECK(r.in_SV0q);
    CHECK_FALSE(r.in_SV1q);
    CHECK_THAT(r.tail_value_at_1, WithinRel(1.0, 1e-9));
    auto s = classify(parse_weight("log(-2,-2)"), 1.0);
    CHECK(s.in_SV0q);
    CHECK(s.in_SV1q);
    CHECK_THAT(s.head_value_at_1, WithinRel(1.0, 1e-9));
}

TEST_CASE("tilde construction") {
    auto b = parse_weight("log(0,-2)");
    auto bt = tilde_construction(b);
    // 1/(1 + ln t) for t >= 1, 1 - ln t below
    CHECK_THAT(bt(std::exp(2.0)), WithinRel(1.0 / 3.0, 1e-9));
    CHECK_THAT(bt(std::exp(-3.0)), WithinRel(4.0, 1e-9));
    CHECK_THAT(std::exp(bt.log_at(800.0)), WithinRel(1.0 / 801.0, 1e-9));
    CHECK_THROWS_AS(tilde_construction(parse_weight("log(0,-1)")), PreconditionError);
}

TEST_CASE("slow variation constants") {
    // t^{-eps}(1 + ln t): ratio of the peak at ln t = 1/eps - 1 to the value at t = 1
    auto b = parse_weight("log(0,1)");
    for (double eps : {0.1, 0.5}) {
        auto c = sv_check(b, eps);
        CHECK(c.up_constant == 1.0);
        CHECK_THAT(c.down_constant, WithinRel(std::exp(eps - 1.0) / eps, 1e-3));
    }
    auto one = sv_check(WeightExpr::one(), 0.01);
    CHECK(one.passes(1.0));
}

TEST_CASE("tails starting below t = 1 cross the |ln t| kink accurately") {
    auto b = parse_weight("log(-2,-2)");
    // int_x^inf (1+|u|)^{-2} du = 2 - 1/(1-x) for x < 0
    for (double x : {-0.5, -1.0, -5.0, -100.0, -1e4})
        CHECK_THAT(std::exp(log_tail_qnorm_x(b, 1.0, x)), WithinRel(2.0 - 1.0 / (1.0 - x), 1e-10));
}
