#include <doctest.h>

#include <random>
#include <set>

#include "sadeepdecs/expr.hpp"

using namespace sadeepdecs;

TEST_SUITE("expr") {

TEST_CASE("evaluates arithmetic over parameters") {
  const auto e = parse_expr("1 - p * (q + 0.5)");
  CHECK(e.evaluate({{"p", 0.4}, {"q", 0.5}}) == doctest::Approx(0.6));
  std::set<std::string> names;
  e.collect_params(names);
  CHECK(names == std::set<std::string>{"p", "q"});
}

TEST_CASE("subtraction is left associative") {
  CHECK(parse_expr("1 - 0.25 - 0.25").evaluate({}) == doctest::Approx(0.5));
  CHECK(parse_expr("1 - (0.25 - 0.25)").evaluate({}) == doctest::Approx(1.0));
}

TEST_CASE("missing parameter") {
  CHECK_THROWS_AS(parse_expr("p + 1").evaluate({}), ExprError);
}

TEST_CASE("malformed text") {
  for (const char* bad : {"", "1 +", "(p", "p)", "1 ** 2", "p q", "1e", "#"})
    CHECK_THROWS_AS(parse_expr(bad), ExprError);
}

TEST_CASE("signed literals") {
  CHECK(parse_expr("-0.5").evaluate({}) == doctest::Approx(-0.5));
  CHECK(parse_expr("2 * -1").evaluate({}) == doctest::Approx(-2.0));
}

namespace {

ParamExpr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 4 : 1);
  switch (pick(rng)) {
    case 0: return ParamExpr::literal(std::uniform_int_distribution<int>(0, 100)(rng) / 8.0);
    case 1: return ParamExpr::param(std::string(1, static_cast<char>('a' + rng() % 4)));
    case 2: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 3: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    default: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
  }
}

}  // namespace

TEST_CASE("print/parse round trip on random trees") {
  std::mt19937_64 rng(11);
  const Valuation v{{"a", 0.3}, {"b", 1.7}, {"c", -2.0}, {"d", 0.125}};
  for (int i = 0; i < 500; ++i) {
    const ParamExpr e = random_expr(rng, 5);
    const ParamExpr back = parse_expr(e.to_string());
    INFO(e.to_string());
    CHECK(back == e);
    CHECK(back.evaluate(v) == doctest::Approx(e.evaluate(v)));
  }
}

}
