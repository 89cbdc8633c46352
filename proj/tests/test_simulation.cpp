#include <doctest.h>

#include <cmath>

#include "cldrf/simulation.hpp"

using namespace cldrf;

TEST_CASE("generate: motivating layout and noiseless truth") {
    const auto labeled = generate({Scenario::Motivating, 800, 42});
    CHECK(labeled.data.n() == 800);
    CHECK(labeled.data.p() == 2);
    CHECK(labeled.truth.C == 4);
    CHECK(labeled.truth.cluster_sizes() == std::vector<int>{200, 200, 200, 200});

    // Cluster 1 mean model 5 + 2t + 1.6t^2.
    CHECK(labeled.true_coeffs[0] == std::array<double, 3>{5.0, 2.0, 1.6});
    CHECK(labeled.true_mu(1, 2.0) == doctest::Approx(5 + 4 + 1.6 * 4));

    // Noiseless generation hits the true curves exactly.
    const auto clean = generate({Scenario::Motivating, 400, 42}, 0.0);
    for (Eigen::Index i = 0; i < clean.data.n(); ++i) {
        const int c = clean.truth.labels[static_cast<std::size_t>(i)];
        CHECK(clean.data.y[i] ==
              doctest::Approx(clean.true_mu(c, clean.data.t[i])).epsilon(1e-12));
    }
}

TEST_CASE("generate: cluster-1 covariate supports differ across designs") {
    // The motivating design draws x2 on [0, 0.4]; the linear design on [0, 0.5].
    const auto mot = generate({Scenario::Motivating, 4000, 9});
    const auto lin = generate({Scenario::LinearC4, 4000, 9});
    double mot_max = 0.0;
    double lin_max = 0.0;
    for (int i = 0; i < 1000; ++i) {
        mot_max = std::max(mot_max, mot.data.X(i, 1));
        lin_max = std::max(lin_max, lin.data.X(i, 1));
    }
    CHECK(mot_max <= 0.4);
    CHECK(lin_max > 0.45);  // 1000 draws on [0, 0.5] reach past 0.45 a.s.
}

TEST_CASE("generate: five-cluster design carries the steep negative arm") {
    const auto labeled = generate({Scenario::LinearC5, 800, 7});
    CHECK(labeled.truth.C == 5);
    CHECK(labeled.true_coeffs[4] == std::array<double, 3>{-20.0, -10.0, 0.0});
    const auto clean = generate({Scenario::LinearC5, 400, 7}, 0.0);
    for (Eigen::Index i = 0; i < clean.data.n(); ++i) {
        if (clean.truth.labels[static_cast<std::size_t>(i)] == 5) {
            CHECK(clean.data.y[i] ==
                  doctest::Approx(-20.0 - 10.0 * clean.data.t[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("generate: random-treatment scenarios have no covariates") {
    const auto labeled = generate({Scenario::RandomC4, 800, 5});
    CHECK(labeled.data.p() == 0);
    CHECK(labeled.truth.C == 4);
    // t ~ N(1,1): the sample mean lands near 1.
    CHECK(std::abs(labeled.data.t.mean() - 1.0) < 0.15);
}

TEST_CASE("generate is bit-reproducible") {
    const auto a = generate({Scenario::LinearC4, 400, 1234});
    const auto b = generate({Scenario::LinearC4, 400, 1234});
    CHECK((a.data.y.array() == b.data.y.array()).all());
    CHECK((a.data.t.array() == b.data.t.array()).all());
    CHECK((a.data.X.array() == b.data.X.array()).all());
    const auto c = generate({Scenario::LinearC4, 400, 1235});
    CHECK(!(a.data.y.array() == c.data.y.array()).all());
}

TEST_CASE("generate validates divisibility") {
    CHECK_THROWS_AS(generate({Scenario::LinearC4, 801, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate({Scenario::LinearC3, 800, 1}), std::invalid_argument);
    CHECK_NOTHROW(generate({Scenario::LinearC3, 801, 1}));
}

TEST_CASE("scenario names round-trip") {
    for (Scenario s : {Scenario::Motivating, Scenario::LinearC3, Scenario::LinearC4,
                       Scenario::LinearC5, Scenario::RandomC3, Scenario::RandomC4,
                       Scenario::RandomC5}) {
        CHECK(parse_scenario(scenario_name(s)) == s);
    }
    CHECK_THROWS_AS(parse_scenario("linear-c9"), std::invalid_argument);
}

TEST_CASE("run_replications is deterministic and fills every record") {
    ScenarioConfig cfg{Scenario::LinearC4, 80, 31};
    ReplicationOptions options;
    options.reps = 3;
    options.C_max = 5;
    options.fit.spec = scenario_default_spec(cfg.scenario);

    const auto a = run_replications(cfg, options);
    const auto b = run_replications(cfg, options);
    REQUIRE(a.records.size() == 3);
    CHECK(a.reps == 3);
    auto same_rmse = [](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const bool both_nan = std::isnan(x[i]) && std::isnan(y[i]);
            if (!both_nan && x[i] != y[i]) return false;
        }
        return true;
    };
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(a.records[r].seed == b.records[r].seed);
        CHECK(a.records[r].chosen_C == b.records[r].chosen_C);
        CHECK(a.records[r].rand == b.records[r].rand);
        CHECK(same_rmse(a.records[r].adrf_rmse, b.records[r].adrf_rmse));
    }
    CHECK(a.rand_mean == b.rand_mean);
    CHECK(a.chosen_hit_rate == b.chosen_hit_rate);

    // Same work distributed over two workers changes nothing.
    options.threads = 2;
    const auto c = run_replications(cfg, options);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(a.records[r].rand == c.records[r].rand);
        CHECK(a.records[r].chosen_C == c.records[r].chosen_C);
    }
}

TEST_CASE("run_replications recovers the linear four-cluster design") {
    ScenarioConfig cfg{Scenario::LinearC4, 400, 99};
    ReplicationOptions options;
    options.reps = 5;
    options.C_max = 6;
    options.threads = 2;
    options.fit.spec = scenario_default_spec(cfg.scenario);
    const auto summary = run_replications(cfg, options);
    CHECK(summary.failures == 0);
    CHECK(summary.chosen_hit_rate >= 0.8);
    CHECK(summary.rand_mean >= 0.9);
    for (int c = 0; c < 4; ++c) {
        CHECK(std::isfinite(summary.rmse_mean[static_cast<std::size_t>(c)]));
    }
}
