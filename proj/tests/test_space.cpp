#include "spbopt/space.hpp"

#include <cmath>

#include "doctest.h"
#include "spbopt/rng.hpp"

using namespace spbopt;

TEST_CASE("validate_space computes encoded dimensions") {
  const auto one = validate_space({ParamSpec::real("x", 0.0, 1.0)});
  CHECK(one.encoded_dim() == 1);

  const auto mixed = validate_space(
      {ParamSpec::categorical("c", {"a", "b", "c"}), ParamSpec::boolean("b")});
  CHECK(mixed.encoded_dim() == 4);  // 3 one-hot + 1
}

TEST_CASE("validate_space rejects invalid specs") {
  CHECK_THROWS_AS(validate_space({}), SpaceError);
  CHECK_THROWS_AS(validate_space({ParamSpec::real("x", -1.0, 10.0, Warp::kLog)}),
                  SpaceError);
  CHECK_THROWS_AS(validate_space({ParamSpec::real("x", 0.0, 10.0, Warp::kLog)}),
                  SpaceError);
  CHECK_THROWS_AS(
      validate_space({ParamSpec::real("x", 0.2, 1.5, Warp::kLogit)}),
      SpaceError);
  CHECK_THROWS_AS(validate_space({ParamSpec::real("x", 1.0, 1.0)}), SpaceError);
  CHECK_THROWS_AS(validate_space({ParamSpec::real("x", 2.0, 1.0)}), SpaceError);
  CHECK_THROWS_AS(validate_space({ParamSpec::real("x", 0.0, 1.0),
                                  ParamSpec::boolean("x")}),
                  SpaceError);
  CHECK_THROWS_AS(validate_space({ParamSpec::categorical("c", {})}), SpaceError);
  CHECK_THROWS_AS(validate_space({ParamSpec::categorical("c", {"a"})}),
                  SpaceError);
  CHECK_THROWS_AS(validate_space({ParamSpec::categorical("c", {"a", "a"})}),
                  SpaceError);
  // integer lo == hi is allowed
  CHECK_NOTHROW(validate_space({ParamSpec::integer("k", 3, 3)}));
}

TEST_CASE("warp maps known values") {
  const auto space = validate_space({ParamSpec::real("x", 0.0, 10.0)});
  CHECK(space.warp({{"x", 2.5}})[0] == doctest::Approx(0.25).epsilon(1e-14));

  const auto log_space =
      validate_space({ParamSpec::real("x", 1.0, 1000.0, Warp::kLog)});
  CHECK(log_space.warp({{"x", 10.0}})[0] ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const auto bool_space = validate_space({ParamSpec::boolean("b")});
  CHECK(bool_space.warp({{"b", true}})[0] == 1.0);
  CHECK(bool_space.warp({{"b", false}})[0] == 0.0);
}

TEST_CASE("warp rejects out-of-bounds and unknown categories") {
  const auto space = validate_space({ParamSpec::real("x", 0.0, 10.0)});
  CHECK_THROWS_AS(space.warp({{"x", -0.5}}), SpaceError);
  CHECK_THROWS_AS(space.warp({{"x", 10.5}}), SpaceError);
  CHECK_THROWS_AS(space.warp({}), SpaceError);

  const auto cats = validate_space({ParamSpec::categorical("c", {"a", "b"})});
  CHECK_THROWS_AS(cats.warp({{"c", std::string("z")}}), SpaceError);
}

TEST_CASE("unwarp inverts and applies rounding rules") {
  const auto space = validate_space({ParamSpec::real("x", 0.0, 10.0)});
  Eigen::VectorXd u(1);
  u << 0.25;
  CHECK(std::get<double>(space.unwarp(u).at("x")) ==
        doctest::Approx(2.5).epsilon(1e-14));

  const auto ints = validate_space({ParamSpec::integer("k", 1, 4)});
  u << 0.6;  // maps to 2.8, rounds to 3
  CHECK(std::get<std::int64_t>(ints.unwarp(u).at("k")) == 3);

  const auto cats =
      validate_space({ParamSpec::categorical("c", {"a", "b", "c"})});
  Eigen::VectorXd block(3);
  block << 0.2, 0.2, 0.2;  // tie -> lowest index
  CHECK(std::get<std::string>(cats.unwarp(block).at("c")) == "a");

  CHECK_THROWS_AS(cats.unwarp(u), SpaceError);  // dimension mismatch
}

TEST_CASE("degenerate integer range maps through the cube midpoint") {
  const auto space = validate_space({ParamSpec::integer("k", 3, 3)});
  CHECK(space.warp({{"k", std::int64_t{3}}})[0] == 0.5);
  Eigen::VectorXd u(1);
  u << 0.9;
  CHECK(std::get<std::int64_t>(space.unwarp(u).at("k")) == 3);
}

namespace {

SpaceDefinition random_mixed_space() {
  return validate_space({
      ParamSpec::real("lin", -3.0, 7.0),
      ParamSpec::real("log", 0.5, 2000.0, Warp::kLog),
      ParamSpec::real("logit", 0.05, 0.95, Warp::kLogit),
      ParamSpec::real("bilog", -50.0, 120.0, Warp::kBilog),
      ParamSpec::integer("int", -5, 17),
      ParamSpec::categorical("cat", {"p", "q", "r", "s"}),
      ParamSpec::boolean("flag"),
  });
}

Assignment random_assignment(const SpaceDefinition& space, Rng& rng) {
  Assignment x;
  for (const ParamSpec& spec : space.params()) {
    switch (spec.kind) {
      case ParamKind::kReal:
        x[spec.name] = rng.uniform(spec.lo, spec.hi);
        break;
      case ParamKind::kInteger:
        x[spec.name] =
            static_cast<std::int64_t>(spec.lo) +
            static_cast<std::int64_t>(rng.uniform_below(
                static_cast<std::uint64_t>(spec.hi - spec.lo) + 1));
        break;
      case ParamKind::kCategorical:
        x[spec.name] =
            spec.categories[rng.uniform_below(spec.categories.size())];
        break;
      case ParamKind::kBoolean:
        x[spec.name] = rng.uniform() < 0.5;
        break;
    }
  }
  return x;
}

}  // namespace

TEST_CASE("round trip: unwarp(warp(x)) == x on random assignments") {
  const auto space = random_mixed_space();
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Assignment x = random_assignment(space, rng);
    const Eigen::VectorXd u = space.warp(x);
    CHECK(u.minCoeff() >= 0.0);
    CHECK(u.maxCoeff() <= 1.0);
    const Assignment back = space.unwarp(u);
    for (const ParamSpec& spec : space.params()) {
      if (spec.kind == ParamKind::kReal) {
        const double a = std::get<double>(x.at(spec.name));
        const double b = std::get<double>(back.at(spec.name));
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
      } else {
        CHECK(x.at(spec.name) == back.at(spec.name));
      }
    }
  }
}

TEST_CASE("all four warps are strictly increasing") {
  const std::vector<std::pair<Warp, std::pair<double, double>>> cases = {
      {Warp::kLinear, {-3.0, 8.0}},
      {Warp::kLog, {0.25, 900.0}},
      {Warp::kLogit, {0.02, 0.98}},
      {Warp::kBilog, {-40.0, 60.0}},
  };
  Rng rng(7);
  for (const auto& [warp, bounds] : cases) {
    const auto space =
        validate_space({ParamSpec::real("x", bounds.first, bounds.second, warp)});
    for (int trial = 0; trial < 100; ++trial) {
      double a = rng.uniform(bounds.first, bounds.second);
      double b = rng.uniform(bounds.first, bounds.second);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      CHECK(space.warp({{"x", a}})[0] < space.warp({{"x", b}})[0]);
    }
  }
}

TEST_CASE("space_from_json_text parses the documented format") {
  const std::string text = R"({
    "lr": {"type": "real", "space": "log", "range": [1e-4, 1.0]},
    "depth": {"type": "int", "range": [1, 12]},
    "kind": {"type": "cat", "values": ["a", "b"]},
    "fast": {"type": "bool"}
  })";
  const auto space = space_from_json_text(text);
  CHECK(space.params().size() == 4);
  CHECK(space.params()[0].name == "lr");
  CHECK(space.params()[0].warp == Warp::kLog);
  CHECK(space.params()[1].kind == ParamKind::kInteger);
  CHECK(space.encoded_dim() == 1 + 1 + 2 + 1);

  CHECK_THROWS_AS(space_from_json_text("not json"), SpaceError);
  CHECK_THROWS_AS(space_from_json_text(R"({"x": {"type": "real"}})"),
                  SpaceError);
  CHECK_THROWS_AS(
      space_from_json_text(R"({"x": {"type": "wat", "range": [0, 1]}})"),
      SpaceError);
}
