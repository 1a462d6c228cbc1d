#include "uvireid/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uvireid/errors.hpp"
#include "uvireid/matching.hpp"

namespace uvireid {

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

EmbeddingDataset dataset_for(const TrainConfig& cfg) {
    if (!cfg.data_path.empty()) return load_dataset(cfg.data_path);
    return generate(cfg.gen);
}

MetricsReport report_from(const Trainer& trainer) {
    MetricsReport report;
    report.v2i = trainer.evaluate_v2i();
    report.i2v = trainer.evaluate_i2v();
    report.match_accuracy = trainer.match_accuracy();
    report.curves = trainer.curves();
    report.bmm = trainer.bmm_rows();
    return report;
}

}  // namespace

MetricsReport run_pipeline(const TrainConfig& cfg) {
    Trainer trainer(cfg, dataset_for(cfg));
    trainer.run_stage1();
    trainer.run_stage2();
    trainer.run_stage3();
    return report_from(trainer);
}

MetricsReport run_experiment(const TrainConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    Trainer trainer(cfg, dataset_for(cfg));
    trainer.run_stage1();
    trainer.run_stage2();
    trainer.run_stage3();
    MetricsReport report = report_from(trainer);

    {
        std::ofstream os(out_dir / "metrics.csv", std::ios::binary);
        write_metrics_csv(os, report);
    }
    {
        std::ofstream os(out_dir / "curves.csv", std::ios::binary);
        write_curves_csv(os, report);
    }
    {
        std::ofstream os(out_dir / "bmm.csv", std::ios::binary);
        write_bmm_csv(os, report);
    }
    if (trainer.has_match()) {
        std::ofstream os(out_dir / "match.csv", std::ios::binary);
        write_match_csv(os, trainer.match());
    }
    diff::save_checkpoint(out_dir / "model.uvnet",
                    {{"encoder", &trainer.encoder()},
                     {"gen_vi", &trainer.pair().gen_vi},
                     {"gen_iv", &trainer.pair().gen_iv},
                     {"critic_v", &trainer.pair().critic_v},
                     {"critic_i", &trainer.pair().critic_i}});
    return report;
}

void write_metrics_csv(std::ostream& os, const MetricsReport& report) {
    os << "direction,rank1,rank5,rank10,rank20,map,minp\n";
    auto row = [&os](const char* dir, const DirectionMetrics& m) {
        os << dir << ',' << fmt(m.rank1) << ',' << fmt(m.rank5) << ',' << fmt(m.rank10) << ','
           << fmt(m.rank20) << ',' << fmt(m.map) << ',' << fmt(m.minp) << '\n';
    };
    row("V2I", report.v2i);
    row("I2V", report.i2v);
}

void write_curves_csv(std::ostream& os, const MetricsReport& report) {
    os << "stage,epoch,metric,value\n";
    for (const EpochStat& s : report.curves)
        os << s.stage << ',' << s.epoch << ',' << s.metric << ',' << fmt(s.value, "%.9g") << '\n';
}

void write_bmm_csv(std::ostream& os, const MetricsReport& report) {
    os << "epoch,alpha0,beta0,alpha1,beta1,pi1\n";
    for (const BmmRow& r : report.bmm)
        os << r.epoch << ',' << fmt(r.alpha0, "%.9g") << ',' << fmt(r.beta0, "%.9g") << ','
           << fmt(r.alpha1, "%.9g") << ',' << fmt(r.beta1, "%.9g") << ',' << fmt(r.pi1, "%.9g")
           << '\n';
}

double median(std::vector<double> values) {
    if (values.empty()) throw ContractError("median: empty input");
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

struct SeedStats {
    double rank1 = 0, map = 0, minp = 0;
};

SeedStats median_over_seeds(const TrainConfig& base, int seeds) {
    std::vector<double> rank1, map, minp;
    for (int s = 0; s < seeds; ++s) {
        TrainConfig cfg = base;
        cfg.seed = base.seed + static_cast<uint64_t>(s);
        cfg.gen.seed = cfg.seed;
        MetricsReport r = run_pipeline(cfg);
        rank1.push_back(0.5 * (r.v2i.rank1 + r.i2v.rank1));
        map.push_back(0.5 * (r.v2i.map + r.i2v.map));
        minp.push_back(0.5 * (r.v2i.minp + r.i2v.minp));
    }
    return {median(rank1), median(map), median(minp)};
}

}  // namespace

std::vector<AblationRow> run_loss_ablation(const TrainConfig& base, int seeds) {
    std::vector<AblationRow> rows;
    for (PlcMode mode : {PlcMode::ClusterNce, PlcMode::Static, PlcMode::Dynamic}) {
        for (bool cma : {false, true}) {
            for (bool lfc : {false, true}) {
                TrainConfig cfg = base;
                cfg.plc_mode = mode;
                cfg.lambda_cma = cma ? base.lambda_cma : 0.0;
                cfg.lambda_lfc = lfc ? base.lambda_lfc : 0.0;
                SeedStats st = median_over_seeds(cfg, seeds);
                rows.push_back({mode, cma, lfc, st.rank1, st.map, st.minp});
            }
        }
    }
    return rows;
}

void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
    os << "plc_mode,cma,lfc,rank1,map,minp\n";
    for (const AblationRow& r : rows)
        os << to_string(r.mode) << ',' << (r.cma ? 1 : 0) << ',' << (r.lfc ? 1 : 0) << ','
           << fmt(r.rank1) << ',' << fmt(r.map) << ',' << fmt(r.minp) << '\n';
}

std::vector<LambdaCell> run_lambda_grid(const TrainConfig& base, int seeds) {
    std::vector<LambdaCell> cells;
    for (double l1 : {0.0, 0.5, 1.0}) {
        for (double l2 : {0.0, 0.5, 1.0}) {
            TrainConfig cfg = base;
            cfg.lambda_cma = l1;
            cfg.lambda_lfc = l2;
            SeedStats st = median_over_seeds(cfg, seeds);
            cells.push_back({l1, l2, st.map, st.minp});
        }
    }
    return cells;
}

void write_lambda_csv(std::ostream& os, const std::vector<LambdaCell>& cells) {
    os << "lambda1,lambda2,map,minp\n";
    for (const LambdaCell& c : cells)
        os << fmt(c.lambda1, "%.2f") << ',' << fmt(c.lambda2, "%.2f") << ',' << fmt(c.map) << ','
           << fmt(c.minp) << '\n';
}

}  // namespace uvireid
