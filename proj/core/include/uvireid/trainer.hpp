#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uvireid/beta_mixture.hpp"
#include "uvireid/config.hpp"
#include "uvireid/dataset.hpp"
#include "uvireid/dbscan.hpp"
#include "uvireid/matching.hpp"
#include "uvireid/memory_bank.hpp"
#include "uvireid/metrics.hpp"
#include "uvireid/optimizer.hpp"
#include "uvireid/translation.hpp"

namespace uvireid {

struct EpochStat {
    int stage = 0;
    int epoch = 0;  // 1-based within the stage
    std::string metric;
    double value = 0.0;
};

struct BmmRow {
    int epoch = 0;  // global encoder epoch
    double alpha0 = 0, beta0 = 0, alpha1 = 0, beta1 = 0, pi1 = 0;
};

// Three-stage training driver. Stage 1 trains the encoder with cluster
// contrastive / PLC objectives, stage 2 trains the translators and critics
// adversarially on frozen features, stage 3 fine-tunes the encoder with the
// combined PLC + CMA + LFC objective while interleaving GAN sweeps.
class Trainer {
public:
    Trainer(TrainConfig cfg, EmbeddingDataset dataset);

    void run_stage1();
    void run_stage2();
    void run_stage3();

    DirectionMetrics evaluate_v2i() const;
    DirectionMetrics evaluate_i2v() const;

    const diff::Network& encoder() const { return encoder_; }
    const TranslationPair& pair() const { return pair_; }
    const EmbeddingDataset& dataset() const { return dataset_; }
    const std::vector<EpochStat>& curves() const { return curves_; }
    const std::vector<BmmRow>& bmm_rows() const { return bmm_rows_; }
    bool has_match() const { return !match_.v_to_i.empty(); }
    const MatchTable& match() const { return match_; }

    // Fraction of clusters matched to the cluster of the same majority
    // ground-truth identity, averaged over both directions.
    double match_accuracy() const;

    FeatureMatrix extract_features() const;

    // Majority-identity agreement between a match direction and the ground
    // truth (exposed for the matching benchmarks).
    static double direction_accuracy(const EmbeddingDataset& ds,
                                     const std::vector<std::vector<int>>& src_members,
                                     const std::vector<std::vector<int>>& tgt_members,
                                     const std::vector<int>& match);

private:
    struct Batch {
        std::vector<int> visible;   // original sample indices
        std::vector<int> infrared;
    };

    void encoder_epoch(int stage, int local_epoch, bool use_mla);
    void gan_epoch(int stage, int local_epoch, const FeatureMatrix& feats);
    void recluster(const FeatureMatrix& feats, int global_epoch);
    void corrupt_labels(int global_epoch);
    void build_banks(const FeatureMatrix& feats);
    void build_pseudo_banks(const FeatureMatrix& feats);
    void refresh_match(const FeatureMatrix& feats, int stage3_epoch);
    std::vector<Batch> plan_batches(int global_epoch) const;
    void finish_epoch_bmm(int global_epoch, const std::vector<std::pair<int, double>>& losses);
    double weight_for(int sample_idx, int global_epoch) const;
    void note(int stage, int epoch, const std::string& metric, double value);

    TrainConfig cfg_;
    EmbeddingDataset dataset_;
    diff::Network encoder_;
    TranslationPair pair_;
    std::optional<diff::Optimizer> enc_opt_;
    std::optional<GanOptimizers> gan_opts_;

    DatasetLabels labels_;
    MemoryBank bank_v_, bank_i_;
    MemoryBank pseudo_v_, pseudo_i_;  // indexed by infrared / visible clusters
    MatchTable match_;

    std::vector<double> sample_weight_;
    std::vector<char> corrupt_candidate_;  // fixed per run
    std::vector<char> corrupted_now_;      // refreshed per epoch
    int gan_epochs_done_ = 0;

    std::vector<EpochStat> curves_;
    std::vector<BmmRow> bmm_rows_;
};

}  // namespace uvireid
