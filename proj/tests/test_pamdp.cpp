#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "paxrl/pamdp.hpp"
#include "support/oracles.hpp"

using pax::ActionSchema;
using pax::assemble_action_vector;
using pax::epsilon_at;
using pax::EpsilonSchedule;
using pax::exploration_action_vector;
using pax::explore_action;
using pax::ParameterizedAction;
using pax::select_action;

TEST_CASE("hfo schema layout") {
  const auto schema = ActionSchema::hfo();
  CHECK(schema.num_actions() == 4);
  CHECK(schema.num_params() == 6);
  CHECK(schema.action_vector_size() == 10);
  CHECK(schema.action(0).name == "Dash");
  CHECK(schema.action(1).name == "Turn");
  CHECK(schema.action(2).name == "Tackle");
  CHECK(schema.action(3).name == "Kick");
  CHECK(schema.param_offset(0) == 0);
  CHECK(schema.param_offset(1) == 2);
  CHECK(schema.param_offset(2) == 3);
  CHECK(schema.param_offset(3) == 4);
  CHECK(schema.param(4).name == "power");
  CHECK(schema.param(4).min_value == 0.0);
  CHECK(schema.param(4).max_value == 100.0);
  CHECK(schema.param(5).min_value == -180.0);
  CHECK(schema.param(5).max_value == 180.0);
}

TEST_CASE("schema validation") {
  CHECK_THROWS_AS(ActionSchema({}), std::invalid_argument);
  CHECK_THROWS_AS(ActionSchema({{"A", {{"p", 1.0, 1.0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(ActionSchema({{"A", {}}, {"A", {}}}), std::invalid_argument);
}

TEST_CASE("select_action picks the argmax and its parameter slice") {
  const auto schema = ActionSchema::hfo();
  const std::vector<double> params = {60.0, 30.0, 45.0, -10.0, 80.0, 5.0};

  auto act = select_action(std::vector<double>{0.2, 0.9, -0.3, 0.1}, params, schema);
  CHECK(act.discrete_index == 1);
  REQUIRE(act.parameters.size() == 1);
  CHECK(act.parameters[0] == 45.0);

  act = select_action(std::vector<double>{0.5, 0.5, 0.5, 0.5}, params, schema);
  CHECK(act.discrete_index == 0);  // tie -> lowest index

  act = select_action(std::vector<double>{5.0, 0.0, 0.0, 0.0}, params, schema);
  CHECK(act.discrete_index == 0);
  CHECK(act.parameters == std::vector<double>{60.0, 30.0});
}

TEST_CASE("select_action validates shapes") {
  const auto schema = ActionSchema::hfo();
  CHECK_THROWS_AS(select_action(std::vector<double>{1.0}, std::vector<double>(6, 0.0), schema),
                  std::invalid_argument);
  CHECK_THROWS_AS(select_action(std::vector<double>(4, 0.0), std::vector<double>(5, 0.0), schema),
                  std::invalid_argument);
}

TEST_CASE("explore_action respects bounds, is uniform over actions, reproducible") {
  const auto schema = ActionSchema::hfo();
  std::mt19937_64 rng(77);
  std::vector<long> counts(4, 0);
  const long draws = 100000;
  for (long i = 0; i < draws; ++i) {
    const auto act = explore_action(schema, rng);
    counts[act.discrete_index]++;
    const auto& spec = schema.action(act.discrete_index);
    REQUIRE(act.parameters.size() == spec.params.size());
    for (std::size_t j = 0; j < act.parameters.size(); ++j) {
      CHECK(act.parameters[j] >= spec.params[j].min_value);
      CHECK(act.parameters[j] <= spec.params[j].max_value);
    }
  }
  const double stat = oracles::chi_square_uniform(counts, draws);
  CHECK(stat < oracles::chi_square_critical(3.0, oracles::kNormalQuantile999));

  std::mt19937_64 rng_a(123);
  std::mt19937_64 rng_b(123);
  const auto a = explore_action(schema, rng_a);
  const auto b = explore_action(schema, rng_b);
  CHECK(a.discrete_index == b.discrete_index);
  CHECK(a.parameters == b.parameters);
}

TEST_CASE("epsilon schedule endpoints and midpoint") {
  const EpsilonSchedule sched;
  CHECK(epsilon_at(sched, 0) == 1.0);
  CHECK(epsilon_at(sched, 10000) == 0.1);
  CHECK(epsilon_at(sched, 50000) == 0.1);
  CHECK(epsilon_at(sched, 5000) == doctest::Approx(0.55).epsilon(1e-12));
  CHECK_THROWS_AS(epsilon_at(sched, -1), std::invalid_argument);
}

TEST_CASE("epsilon schedule is non-increasing and stays in range") {
  const EpsilonSchedule sched{0.9, 0.05, 2000};
  double prev = sched.start;
  for (std::int64_t u = 0; u <= 4000; u += 7) {
    const double e = epsilon_at(sched, u);
    CHECK(e <= prev + 1e-15);
    CHECK(e >= sched.end);
    CHECK(e <= sched.start);
    prev = e;
  }
}

TEST_CASE("assemble concatenates discrete-first and round trips") {
  const auto schema = ActionSchema::hfo();
  const std::vector<double> disc = {0.1, 0.2, 0.3, 0.4};
  const std::vector<double> par = {1, 2, 3, 4, 5, 6};
  const auto v = assemble_action_vector(disc, par, schema);
  REQUIRE(v.size() == 10);
  for (int i = 0; i < 4; ++i) CHECK(v[i] == disc[i]);
  for (int i = 0; i < 6; ++i) CHECK(v[4 + i] == par[i]);

  const std::vector<double> zeros10 = assemble_action_vector(
      std::vector<double>(4, 0.0), std::vector<double>(6, 0.0), schema);
  for (double x : zeros10) CHECK(x == 0.0);

  // slicing the assembled vector back recovers both parts
  const auto act = select_action(std::span(v).subspan(0, 4), std::span(v).subspan(4, 6), schema);
  CHECK(act.discrete_index == 3);
  CHECK(act.parameters == std::vector<double>{5.0, 6.0});
}

TEST_CASE("exploration vector encoding") {
  const auto schema = ActionSchema::hfo();
  ParameterizedAction turn{1, {45.0}};
  CHECK(exploration_action_vector(turn, schema) ==
        std::vector<double>{0, 1, 0, 0, 0, 0, 45.0, 0, 0, 0});
  ParameterizedAction dash{0, {100.0, 0.0}};
  CHECK(exploration_action_vector(dash, schema) ==
        std::vector<double>{1, 0, 0, 0, 100.0, 0, 0, 0, 0, 0});
}

TEST_CASE("property: select_action recovers a randomly explored action from its vector") {
  const auto schema = ActionSchema::hfo();
  std::mt19937_64 rng(31);
  for (int i = 0; i < 5000; ++i) {
    const auto act = explore_action(schema, rng);
    const auto v = exploration_action_vector(act, schema);
    const auto back =
        select_action(std::span(v).subspan(0, 4), std::span(v).subspan(4, 6), schema);
    CHECK(back.discrete_index == act.discrete_index);
    CHECK(back.parameters == act.parameters);
  }
}
