#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "uvireid/config.hpp"
#include "uvireid/metrics.hpp"
#include "uvireid/trainer.hpp"

namespace uvireid {

struct MetricsReport {
    DirectionMetrics v2i, i2v;
    double match_accuracy = -1.0;  // -1 when no match table was produced
    std::vector<EpochStat> curves;
    std::vector<BmmRow> bmm;
};

// Full pipeline in memory: load/generate data, run the three stages,
// evaluate both directions.
MetricsReport run_pipeline(const TrainConfig& cfg);

// Same, plus artifacts under out_dir: metrics.csv, match.csv, curves.csv,
// bmm.csv and model.uvnet. Output bytes are a pure function of the config.
MetricsReport run_experiment(const TrainConfig& cfg, const std::filesystem::path& out_dir);

void write_metrics_csv(std::ostream& os, const MetricsReport& report);
void write_curves_csv(std::ostream& os, const MetricsReport& report);
void write_bmm_csv(std::ostream& os, const MetricsReport& report);

// {ClusterNCE, S-PLC, D-PLC} x {+-CMA} x {+-LFC}; metrics are medians over
// `seeds` runs seeded base.seed, base.seed+1, ...
struct AblationRow {
    PlcMode mode;
    bool cma = false;
    bool lfc = false;
    double rank1 = 0, map = 0, minp = 0;
};
std::vector<AblationRow> run_loss_ablation(const TrainConfig& base, int seeds = 1);
void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows);

// 3x3 grid over lambda1, lambda2 in {0, 0.5, 1}.
struct LambdaCell {
    double lambda1 = 0, lambda2 = 0;
    double map = 0, minp = 0;
};
std::vector<LambdaCell> run_lambda_grid(const TrainConfig& base, int seeds = 1);
void write_lambda_csv(std::ostream& os, const std::vector<LambdaCell>& cells);

double median(std::vector<double> values);

}  // namespace uvireid
