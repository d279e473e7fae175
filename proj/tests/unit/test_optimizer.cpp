#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "coopmc/optimize.hpp"

using namespace coopmc;

TEST_CASE("constant objective returns the smallest pair") {
  const auto objective = row_objective_from_pairs([](long long, long long) { return 0.25; });
  const auto res = joint_optimize(objective, {3, 10}, {2, 9});
  CHECK(res.xi_rx_star == 3);
  CHECK(res.xi_fc_star == 2);
  CHECK(res.q_star == 0.25);
  CHECK(res.evaluations == 8 * 8);
}

TEST_CASE("exhaustive search finds the grid minimum (re-scan assertion)") {
  const auto objective = row_objective_from_pairs([](long long rx, long long fc) {
    return 0.01 * std::pow(rx - 13.0, 2) + 0.02 * std::pow(fc - 27.0, 2) + 1e-4;
  });
  const auto res = joint_optimize(objective, {1, 40}, {1, 60});
  CHECK(res.xi_rx_star == 13);
  CHECK(res.xi_fc_star == 27);
  for (const auto& p : res.surface) CHECK(res.q_star <= p.qbar);
}

TEST_CASE("coarse-to-fine matches exhaustive on a unimodal surface") {
  const auto objective = row_objective_from_pairs([](long long rx, long long fc) {
    return std::abs(rx - 53.0) * 0.01 + std::abs(fc - 118.0) * 0.005 + 0.001;
  });
  const auto full = joint_optimize(objective, {1, 80}, {1, 160}, SearchStrategy::Exhaustive);
  const auto fast = joint_optimize(objective, {1, 80}, {1, 160}, SearchStrategy::CoarseToFine, 0, 8);
  CHECK(fast.xi_rx_star == full.xi_rx_star);
  CHECK(fast.xi_fc_star == full.xi_fc_star);
  CHECK(fast.q_star == doctest::Approx(full.q_star));
  CHECK(fast.evaluations < full.evaluations);
}

TEST_CASE("optimum never exceeds a user-chosen reference pair") {
  const auto objective = row_objective_from_pairs([](long long rx, long long fc) {
    return 1.0 / (1.0 + rx) + 0.25 / (1.0 + std::abs(fc - 9.0));
  });
  const auto res = joint_optimize(objective, {1, 30}, {1, 30});
  for (long long rx : {1LL, 7LL, 30LL})
    for (long long fc : {1LL, 9LL, 30LL}) {
      const long long fcs[1] = {fc};
      CHECK(res.q_star <= objective(rx, fcs)[0] + 1e-15);
    }
}

TEST_CASE("empty ranges are rejected") {
  const auto objective = row_objective_from_pairs([](long long, long long) { return 0.0; });
  CHECK_THROWS_AS(joint_optimize(objective, {5, 4}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(joint_optimize(objective, {0, 4}, {1, 2}), std::invalid_argument);
}

TEST_CASE("tie-break prefers the smaller FC threshold within a row") {
  const auto objective = row_objective_from_pairs(
      [](long long rx, long long fc) { return rx == 2 && (fc == 3 || fc == 5) ? 0.1 : 0.2; });
  const auto res = joint_optimize(objective, {1, 4}, {1, 6});
  CHECK(res.xi_rx_star == 2);
  CHECK(res.xi_fc_star == 3);
}
