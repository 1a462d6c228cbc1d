#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "uvireid/config.hpp"
#include "uvireid/errors.hpp"

using namespace uvireid;

TEST_CASE("defaults survive an empty config") {
    TrainConfig cfg = parse_train_config_text("", "test");
    CHECK(cfg.tau == 0.05);
    CHECK(cfg.ema == 0.2);
    CHECK(cfg.plc_mode == PlcMode::Dynamic);
    CHECK(cfg.lambda_cma == 0.5);
    CHECK(cfg.lambda_lfc == 0.5);
    CHECK(cfg.lr == 3.5e-3);
    CHECK(cfg.decay_epochs == std::vector<int>{20, 50});
    CHECK(cfg.batch == 32);
    CHECK(cfg.n_critic == 5);
    CHECK(cfg.clip == 0.01);
    CHECK(cfg.gen.num_identities == 20);
    CHECK(cfg.gen.samples_per_identity == 30);
    CHECK(cfg.gen.dim == 64);
    CHECK(cfg.stage1_epochs == 15);
    CHECK(cfg.stage2_epochs == 10);
    CHECK(cfg.stage3_epochs == 20);
}

TEST_CASE("keys, comments and whitespace parse") {
    std::string text =
        "# a comment line\n"
        "tau = 0.1   # trailing comment\n"
        "plc_mode = splc\n"
        "decay_epochs = 5, 9\n"
        "batch=8\n"
        "\n"
        "seed = 123\n"
        "lfc_plain_mean = true\n";
    TrainConfig cfg = parse_train_config_text(text, "test");
    CHECK(cfg.tau == 0.1);
    CHECK(cfg.plc_mode == PlcMode::Static);
    CHECK(cfg.decay_epochs == std::vector<int>{5, 9});
    CHECK(cfg.batch == 8);
    CHECK(cfg.seed == 123);
    CHECK(cfg.lfc_plain_mean == true);
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        parse_train_config_text("taau = 0.1\n", "test");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("taau") != std::string::npos);
    }
}

TEST_CASE("bad values name the key") {
    try {
        parse_train_config_text("tau = warm\n", "test");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("tau") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_train_config_text("plc_mode = fancy\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_train_config_text("matcher = hungarian\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_train_config_text("batch = 0\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_train_config_text("label_corruption = 1.5\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_train_config_text("dbscan_eps = 2.5\n", "test"), ConfigError);
}

TEST_CASE("duplicate keys are rejected") {
    CHECK_THROWS_AS(parse_train_config_text("tau = 0.1\ntau = 0.2\n", "test"), ConfigError);
}

TEST_CASE("missing equals sign is rejected with a line number") {
    try {
        parse_train_config_text("tau = 0.1\nnonsense line\n", "test");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("gen spec parser shares keys and validation") {
    GenSpec spec = parse_gen_spec_text("identities = 7\ndim = 24\nsigma_id = 0.1\n", "test");
    CHECK(spec.num_identities == 7);
    CHECK(spec.dim == 24);
    CHECK(spec.sigma_id == 0.1);
    CHECK_THROWS_AS(parse_gen_spec_text("dim = 1\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_gen_spec_text("tau = 0.1\n", "test"), ConfigError);  // not a gen key
}

TEST_CASE("matcher and mode round-trip through to_string") {
    CHECK(std::string(to_string(PlcMode::ClusterNce)) == "nce");
    CHECK(std::string(to_string(PlcMode::Static)) == "splc");
    CHECK(std::string(to_string(PlcMode::Dynamic)) == "dplc");
    CHECK(std::string(to_string(MatcherKind::Sfm)) == "sfm");
    CHECK(std::string(to_string(MatcherKind::Greedy)) == "greedy");
}
