#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cspda/cmdp_core.hpp"
#include "cspda/environments.hpp"
#include "cspda/lp_oracle.hpp"
#include "test_util.hpp"

using namespace cspda;

TEST_CASE("queue_transition: interior state") {
    const auto row = queue_transition(3, 0.6, 0.4, 5);
    CHECK(row[2] == doctest::Approx(0.36));   // a(1-b)
    CHECK(row[3] == doctest::Approx(0.48));   // ab + (1-a)(1-b)
    CHECK(row[4] == doctest::Approx(0.16));   // (1-a)b
}

TEST_CASE("queue_transition: full buffer ignores the flow action") {
    for (double b : {0.4, 0.7}) {
        const auto row = queue_transition(5, 0.8, b, 5);
        CHECK(row[4] == doctest::Approx(0.8));
        CHECK(row[5] == doctest::Approx(0.2));
        CHECK(row[3] == doctest::Approx(0.0));
    }
}

TEST_CASE("queue_transition: empty queue with no arrivals stays put") {
    const auto row = queue_transition(0, 0.6, 0.0, 5);
    CHECK(row[0] == doctest::Approx(1.0));
}

TEST_CASE("queue transition rows sum to one exactly") {
    for (double a : {0.2, 0.4, 0.6, 0.8}) {
        for (double b : {0.4, 0.5, 0.6, 0.7}) {
            for (int x = 0; x <= 5; ++x) {
                const auto row = queue_transition(x, a, b, 5);
                double sum = 0.0;
                for (double v : row) sum += v;
                CHECK(std::abs(sum - 1.0) <= 1e-15);
            }
        }
    }
}

TEST_CASE("build_queue_cmdp: benchmark dimensions and costs") {
    const CmdpModel m = build_queue_cmdp(QueueParams{});
    CHECK(m.num_states == 6);
    CHECK(m.num_actions == 16);
    CHECK(m.num_constraints == 2);
    CHECK(m.discount == 0.5);
    m.validate();

    const QueueParams params;
    // c1 = -10a + 3: +1 at a = 0.2, -5 at a = 0.8.
    for (int k = 0; k < 16; ++k) {
        const double a = params.service_of(k);
        const double c1 = m.g(0, 0, k) ;
        if (a == 0.2) CHECK(c1 == doctest::Approx(1.0));
        if (a == 0.8) CHECK(c1 == doctest::Approx(-5.0));
    }
    CHECK(m.g_max == doctest::Approx(5.0));

    // Rewards are the affine rescale of c(s) = -s + 5 into [0, 1].
    for (int s = 0; s < 6; ++s)
        CHECK(m.r(s, 0) == doctest::Approx((5.0 - s) / 5.0));

    // Transition rows match queue_transition entry by entry.
    for (int k = 0; k < 16; ++k) {
        const double a = params.service_of(k);
        const double b = params.flow_of(k);
        for (int x = 0; x <= 5; ++x) {
            const auto row = queue_transition(x, a, b, 5);
            for (int x2 = 0; x2 <= 5; ++x2) CHECK(m.p(k, x, x2) == row[x2]);
        }
    }
}

TEST_CASE("random_cmdp is deterministic in the seed") {
    const CmdpModel a = random_cmdp(4, 3, 2, 0.05, 23, 0.8);
    const CmdpModel b = random_cmdp(4, 3, 2, 0.05, 23, 0.8);
    CHECK(a.transition == b.transition);
    CHECK(a.reward == b.reward);
    CHECK(a.constraint_costs == b.constraint_costs);
    CHECK(a.initial_dist == b.initial_dist);
}

TEST_CASE("random_cmdp certifies the requested Slater margin") {
    const CmdpModel m = random_cmdp(4, 3, 1, 0.05, 23, 0.8);
    CHECK(slater_margin(m) >= 0.05);
}

TEST_CASE("random_cmdp with no constraints needs no certification") {
    const CmdpModel m = random_cmdp(3, 2, 0, 1.0, 31, 0.9);
    CHECK(m.num_constraints == 0);
    m.validate();
}

TEST_CASE("random_cmdp reports a generation error when the margin is unreachable") {
    CHECK_THROWS_AS(random_cmdp(3, 2, 2, 0.99, 5, 0.8, 5), std::runtime_error);
}

TEST_CASE("sample_next frequencies pass a chi-square test against P") {
    const CmdpModel m = build_queue_cmdp(QueueParams{});
    const TabularGenerativeModel env(m);
    Rng rng(777);
    const int draws = 100000;
    for (int a = 0; a < m.num_actions; ++a) {
        for (int s = 0; s < m.num_states; ++s) {
            std::vector<int> counts(m.num_states, 0);
            for (int k = 0; k < draws; ++k) ++counts[env.sample_next(s, a, rng)];

            // Pool outcomes with tiny expectation into one bin.
            double stat = 0.0;
            int df = -1;
            double pooled_obs = 0.0, pooled_exp = 0.0;
            for (int s2 = 0; s2 < m.num_states; ++s2) {
                const double expected = draws * m.p(a, s, s2);
                if (expected < 5.0) {
                    pooled_obs += counts[s2];
                    pooled_exp += expected;
                    continue;
                }
                stat += (counts[s2] - expected) * (counts[s2] - expected) / expected;
                ++df;
            }
            if (pooled_exp > 0.0) {
                stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
                ++df;
            }
            if (df < 1) continue;  // deterministic row
            CHECK(stat <= test_util::chi_square_quantile(df, 1.0 - 1e-4));
        }
    }
}

TEST_CASE("initial_sample matches the initial distribution") {
    const CmdpModel m = build_queue_cmdp(QueueParams{});
    const TabularGenerativeModel env(m);
    Rng rng(778);
    const int draws = 120000;
    std::vector<int> counts(m.num_states, 0);
    for (int k = 0; k < draws; ++k) ++counts[env.initial_sample(rng)];
    double stat = 0.0;
    for (int s = 0; s < m.num_states; ++s) {
        const double expected = draws * m.initial_dist[s];
        stat += (counts[s] - expected) * (counts[s] - expected) / expected;
    }
    CHECK(stat <= test_util::chi_square_quantile(m.num_states - 1, 1.0 - 1e-4));
}

TEST_CASE("reward rescaling preserves the optimal occupancy measure") {
    // The stored reward is c/5; solving the same LP with the raw objective
    // must give the same argmax and a 5x objective.
    const CmdpModel m = build_queue_cmdp(QueueParams{});
    const LpSolution scaled = solve_cmdp_lp(m, 0.0);

    CmdpModel raw = m;
    // Raw costs c(s) = -s + 5 lie in [0, 5]; stretch the validity envelope
    // by declaring them through a reward-scale-1 rebuild.
    QueueParams params;
    params.reward_scale = 1.0;
    bool threw = false;
    try {
        raw = build_queue_cmdp(params);
    } catch (const std::invalid_argument&) {
        threw = true;  // rewards above 1 violate the model contract
    }
    CHECK(threw);

    // So compare against a model scaled by a *different* positive factor
    // instead: argmax must be unchanged and objectives proportional.
    QueueParams params10;
    params10.reward_scale = 10.0;
    const CmdpModel half = build_queue_cmdp(params10);
    const LpSolution sol10 = solve_cmdp_lp(half, 0.0);
    REQUIRE(sol10.status == LpStatus::optimal);
    CHECK(sol10.objective * 2.0 == doctest::Approx(scaled.objective).epsilon(1e-9));
    for (std::size_t k = 0; k < scaled.lambda_star.lambda.size(); ++k)
        CHECK(sol10.lambda_star.lambda[k] ==
              doctest::Approx(scaled.lambda_star.lambda[k]).epsilon(1e-9));
}

TEST_CASE("generative model dimension accessors") {
    const CmdpModel m = build_queue_cmdp(QueueParams{});
    const TabularGenerativeModel env(m);
    CHECK(env.num_states() == 6);
    CHECK(env.num_actions() == 16);
    CHECK(env.num_constraints() == 2);
    CHECK(env.reward(2, 3) == m.r(2, 3));
    CHECK(env.cost(1, 2, 3) == m.g(1, 2, 3));
}
