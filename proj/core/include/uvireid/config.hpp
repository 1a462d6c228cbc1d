#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uvireid/dataset.hpp"

namespace uvireid {

enum class PlcMode { ClusterNce, Static, Dynamic };
enum class MatcherKind { Sfm, Greedy };

const char* to_string(PlcMode m);
const char* to_string(MatcherKind m);

// Everything a run needs. Parsed from `key = value` lines; unknown keys are
// rejected so typos fail loudly.
struct TrainConfig {
    std::string data_path;  // empty -> generate from `gen`
    GenSpec gen;

    int encoder_hidden = 0;  // 0 -> 2 * dim
    double tau = 0.05;
    double ema = 0.2;
    PlcMode plc_mode = PlcMode::Dynamic;
    double static_w = 0.5;
    double dbscan_eps = 0.5;
    int dbscan_min_pts = 4;
    double lambda_cma = 0.5;
    double lambda_lfc = 0.5;
    double lr = 3.5e-3;
    double gan_lr = 1e-3;
    int warmup_steps = 10;
    std::vector<int> decay_epochs = {20, 50};
    double decay_factor = 0.1;
    int stage1_epochs = 15;
    int stage2_epochs = 10;
    int stage3_epochs = 20;
    int batch = 32;
    int n_critic = 5;
    double clip = 0.01;
    uint64_t seed = 1;
    int bmm_iters = 10;
    int bmm_start_epoch = 2;          // first epoch that uses dynamic weights
    double label_corruption = 0.0;    // fraction of samples with injected wrong labels
    int sfm_every = 1;
    int sfm_shortlist = 2;
    MatcherKind matcher = MatcherKind::Sfm;
    bool lfc_plain_mean = false;
    bool stage3_fresh_optimizer = true;

    void validate() const;  // throws ConfigError
};

TrainConfig parse_train_config(const std::filesystem::path& path);
TrainConfig parse_train_config_text(const std::string& text, const std::string& origin);
GenSpec parse_gen_spec(const std::filesystem::path& path);
GenSpec parse_gen_spec_text(const std::string& text, const std::string& origin);

}  // namespace uvireid
