// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ankf/comp/runner.hpp"
#include "ankf/errors.hpp"
#include "ankf/io/config.hpp"
#include "ankf/io/episode_io.hpp"
#include "ankf/io/trace_io.hpp"
#include "ankf/sim/generate.hpp"

using namespace ankf;
using namespace ankf::io;

TEST_CASE("config: sections, types, tuples, canonical hash") {
    const std::string text = R"(
# pipeline settings
[episode]
duration_s = 12.5
seed = 42
commands = 0 0.4 0 0.05; 6 0.2 -0.1 0
[episode.gait]
step_freq_hz = 2.5
[train]
parallel = true
lr = 2e-3
)";
    Config cfg = Config::parse_string(text);
    CHECK(cfg.get_double("episode.duration_s", 0) == 12.5);
    CHECK(cfg.get_int("episode.seed", 0) == 42);
    CHECK(cfg.get_double("episode.gait.step_freq_hz", 0) == 2.5);
    CHECK(cfg.get_bool("train.parallel", false) == true);
    CHECK(cfg.get_double("train.lr", 0) == 2e-3);
    CHECK(cfg.get_double("missing.key", 7.0) == 7.0);

    const auto tuples = cfg.get_tuples("episode.commands");
    REQUIRE(tuples.size() == 2);
    CHECK(tuples[0] == std::vector<double>{0, 0.4, 0, 0.05});
    CHECK(tuples[1] == std::vector<double>{6, 0.2, -0.1, 0});

    // Hash is stable under reordering and comment changes.
    Config reordered = Config::parse_string(R"(
[train]
lr = 2e-3
parallel = true
[episode.gait]
step_freq_hz = 2.5
[episode]
seed = 42
commands = 0 0.4 0 0.05; 6 0.2 -0.1 0
duration_s = 12.5
)");
    CHECK(cfg.hash_hex() == reordered.hash_hex());
    Config changed = cfg;
    changed.set("episode.seed", "43");
    CHECK(cfg.hash_hex() != changed.hash_hex());

    CHECK_THROWS_AS(Config::parse_string("[section\nkey = 1"), ConfigError);
    CHECK_THROWS_AS(Config::parse_string("just some text"), ConfigError);
    Config bad = Config::parse_string("a = xyz");
    CHECK_THROWS_AS(bad.get_double("a", 0), ConfigError);

    const sim::EpisodeConfig ec = episode_config_from(cfg);
    CHECK(ec.duration_s == 12.5);
    CHECK(ec.commands.size() == 2);
    CHECK(ec.commands[1].vx == 0.2);
}

TEST_CASE("episode files round trip losslessly in both encodings") {
    sim::EpisodeConfig cfg;
    cfg.duration_s = 1.0;
    cfg.noise.gyro_std = 1e-3;
    cfg.noise.accel_std = 1e-2;
    cfg.contact_accuracy = 0.95;
    cfg.slip.push_back({0.2, 0.8, 0.15, {true, false, true, true}});
    cfg.seed = 77;
    sim::Episode ep = sim::generate_episode(cfg);

    for (const std::string path :
         {std::string("/tmp/ankf_ep_test.jsonl"), std::string("/tmp/ankf_ep_test.bin")}) {
        save_episode(path, ep);
        sim::Episode back = load_episode(path);
        REQUIRE(back.size() == ep.size());
        CHECK(back.config.seed == ep.config.seed);
        CHECK(back.config.slip.size() == 1);
        CHECK(back.model.thigh_len == ep.model.thigh_len);
        double worst = 0.0;
        for (size_t k = 0; k < ep.size(); ++k) {
            worst = std::max(worst, (back.frames[k].gyro - ep.frames[k].gyro).cwiseAbs().maxCoeff());
            worst = std::max(worst, (back.frames[k].joint_pos - ep.frames[k].joint_pos)
                                        .cwiseAbs()
                                        .maxCoeff());
            worst = std::max(worst, (back.truth[k].p - ep.truth[k].p).cwiseAbs().maxCoeff());
            worst = std::max(
                worst, (back.truth[k].foot_vel_w[2] - ep.truth[k].foot_vel_w[2]).cwiseAbs().maxCoeff());
            if (back.frames[k].contact_est != ep.frames[k].contact_est) worst = 1.0;
            if (back.frames[k].contact_gt != ep.frames[k].contact_gt) worst = 1.0;
        }
        CHECK(worst == 0.0);  // bit-exact round trip
    }
    CHECK_THROWS_AS(load_episode("/tmp/ankf_missing.jsonl"), DataError);
}

TEST_CASE("trace files round trip losslessly in both encodings") {
    sim::EpisodeConfig cfg;
    cfg.duration_s = 0.5;
    cfg.noise.gyro_std = 1e-3;
    cfg.seed = 5;
    sim::Episode ep = sim::generate_episode(cfg);
    comp::RunnerConfig rc;
    filter::Trace trace = comp::run_filter(ep, comp::Estimator::kInEkf, rc);

    for (const std::string path :
         {std::string("/tmp/ankf_tr_test.jsonl"), std::string("/tmp/ankf_tr_test.bin")}) {
        save_trace(path, trace, "inekf", "cafebabe");
        LoadedTrace back = load_trace(path);
        CHECK(back.estimator == "inekf");
        CHECK(back.config_hash == "cafebabe");
        REQUIRE(back.trace.size() == trace.size());
        double worst = 0.0;
        for (size_t k = 0; k < trace.size(); ++k) {
            worst = std::max(worst,
                             (back.trace.frames[k].x - trace.frames[k].x).cwiseAbs().maxCoeff());
            worst = std::max(
                worst, (back.trace.frames[k].p_diag - trace.frames[k].p_diag).cwiseAbs().maxCoeff());
            worst = std::max(worst,
                             (back.trace.frames[k].slip - trace.frames[k].slip).cwiseAbs().maxCoeff());
        }
        CHECK(worst == 0.0);
        CHECK(back.trace.frames[10].active == trace.frames[10].active);
    }
}
