#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "uvireid/config.hpp"
#include "uvireid/dataset.hpp"
#include "uvireid/dbscan.hpp"
#include "uvireid/errors.hpp"
#include "uvireid/experiment.hpp"
#include "uvireid/matching.hpp"
#include "uvireid/memory_bank.hpp"
#include "uvireid/metrics.hpp"
#include "uvireid/network.hpp"
#include "uvireid/trainer.hpp"

namespace {

using namespace uvireid;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

FeatureMatrix encode_all(const diff::Network& encoder, const EmbeddingDataset& ds) {
    if (encoder.input_dim() != ds.dim)
        throw DataError("checkpoint expects dim " + std::to_string(encoder.input_dim()) +
                        " but dataset has dim " + std::to_string(ds.dim));
    FeatureMatrix fm(ds.dim);
    std::vector<double> buf;
    for (const SampleRecord& s : ds.samples) {
        diff::Tensor out = encoder.apply(s.feature);
        buf.assign(out.data(), out.data() + out.size());
        l2_normalize_inplace(buf);
        fm.append(buf);
    }
    return fm;
}

void print_direction(const char* name, const DirectionMetrics& m) {
    std::cout << name << "  rank1=" << m.rank1 << " rank5=" << m.rank5 << " rank10=" << m.rank10
              << " rank20=" << m.rank20 << " map=" << m.map << " minp=" << m.minp
              << " queries=" << m.num_queries << " excluded=" << m.num_excluded << "\n";
}

int cmd_gen_data(const std::string& spec_path, const std::string& out_path) {
    GenSpec spec = parse_gen_spec(spec_path);
    EmbeddingDataset ds = generate(spec);
    save_dataset(ds, out_path);
    std::cout << "wrote " << ds.size() << " samples (dim " << ds.dim << ") to " << out_path
              << "\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
    TrainConfig cfg = parse_train_config(config_path);
    MetricsReport report = run_experiment(cfg, out_dir);
    print_direction("V2I", report.v2i);
    print_direction("I2V", report.i2v);
    if (report.match_accuracy >= 0)
        std::cout << "match_accuracy=" << report.match_accuracy << "\n";
    std::cout << "artifacts in " << out_dir << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path) {
    auto nets = diff::load_checkpoint(checkpoint_path);
    auto enc = nets.find("encoder");
    if (enc == nets.end()) throw DataError("checkpoint has no encoder network");
    EmbeddingDataset ds = load_dataset(data_path);
    FeatureMatrix feats = encode_all(enc->second, ds);

    auto metrics_for = [&](Modality qm, Modality gm) {
        std::vector<int> q_rows = ds.originals(qm), g_rows = ds.originals(gm);
        FeatureMatrix q(ds.dim), g(ds.dim);
        std::vector<int> qid, gid;
        for (int r : q_rows) {
            q.append(feats.row(r));
            qid.push_back(ds.samples[static_cast<size_t>(r)].identity);
        }
        for (int r : g_rows) {
            g.append(feats.row(r));
            gid.push_back(ds.samples[static_cast<size_t>(r)].identity);
        }
        return evaluate(q, qid, g, gid);
    };

    MetricsReport report;
    report.v2i = metrics_for(Modality::Visible, Modality::Infrared);
    report.i2v = metrics_for(Modality::Infrared, Modality::Visible);
    write_metrics_csv(std::cout, report);
    return kExitOk;
}

int cmd_match(const std::string& checkpoint_path, const std::string& data_path,
              const std::string& out_path, double eps, int min_pts, int shortlist) {
    auto nets = diff::load_checkpoint(checkpoint_path);
    for (const char* role : {"encoder", "gen_vi", "gen_iv"})
        if (!nets.count(role)) throw DataError(std::string("checkpoint has no ") + role + " network");
    EmbeddingDataset ds = load_dataset(data_path);
    FeatureMatrix feats = encode_all(nets.at("encoder"), ds);

    std::vector<int> v_rows = ds.originals(Modality::Visible);
    std::vector<int> i_rows = ds.originals(Modality::Infrared);
    FeatureMatrix fv(ds.dim), fi(ds.dim);
    for (int r : v_rows) fv.append(feats.row(r));
    for (int r : i_rows) fi.append(feats.row(r));
    PseudoLabeling lv = dbscan(fv, eps, min_pts);
    PseudoLabeling li = dbscan(fi, eps, min_pts);
    if (lv.num_clusters == 0 || li.num_clusters == 0)
        throw ConfigError("clustering produced zero clusters; loosen --eps or --min-pts");
    DatasetLabels labels = relabel(ds, lv, li, v_rows, i_rows);

    MemoryBank bank_v = MemoryBank::init(feats, labels.members_visible, Modality::Visible, 0.2);
    MemoryBank bank_i = MemoryBank::init(feats, labels.members_infrared, Modality::Infrared, 0.2);
    TranslationPair pair;
    pair.gen_vi = nets.at("gen_vi");
    pair.gen_iv = nets.at("gen_iv");
    MatchTable table = sfm_match(feats, labels, pair, bank_v, bank_i, shortlist);

    if (out_path.empty()) {
        write_match_csv(std::cout, table);
    } else {
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw DataError("cannot open output file: " + out_path);
        write_match_csv(os, table);
        std::cout << "wrote match table to " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_report(const std::string& dir) {
    namespace fs = std::filesystem;
    fs::path base(dir);
    bool found = false;

    fs::path metrics = base / "metrics.csv";
    if (fs::exists(metrics)) {
        found = true;
        std::ifstream is(metrics);
        std::cout << "== metrics ==\n" << is.rdbuf();
    }
    fs::path bmm = base / "bmm.csv";
    if (fs::exists(bmm)) {
        std::ifstream is(bmm);
        std::string line, last;
        std::getline(is, line);  // header
        while (std::getline(is, last)) {}
        if (!last.empty()) {
            found = true;
            std::cout << "== last bmm fit ==\n" << line << "\n" << last << "\n";
        }
    }
    fs::path curves = base / "curves.csv";
    if (fs::exists(curves)) {
        found = true;
        std::ifstream is(curves);
        std::string line;
        std::getline(is, line);
        std::map<std::string, std::pair<std::string, double>> final_values;  // metric -> (stage/epoch, value)
        while (std::getline(is, line)) {
            std::istringstream ls(line);
            std::string stage, epoch, metric, value;
            if (!std::getline(ls, stage, ',') || !std::getline(ls, epoch, ',') ||
                !std::getline(ls, metric, ',') || !std::getline(ls, value))
                continue;
            final_values[metric] = {"stage " + stage + " epoch " + epoch, std::stod(value)};
        }
        std::cout << "== final curve values ==\n";
        for (const auto& [metric, entry] : final_values)
            std::cout << metric << " = " << entry.second << "  (" << entry.first << ")\n";
    }
    for (const char* name : {"ablation.csv", "lambda_grid.csv"}) {
        fs::path p = base / name;
        if (fs::exists(p)) {
            found = true;
            std::ifstream is(p);
            std::cout << "== " << name << " ==\n" << is.rdbuf();
        }
    }
    if (!found) throw DataError("no run CSVs found under " + dir);
    return kExitOk;
}

int cmd_ablate(const std::string& config_path, const std::string& out_dir, bool lambda_grid,
               int seeds) {
    TrainConfig cfg = parse_train_config(config_path);
    std::filesystem::create_directories(out_dir);
    if (lambda_grid) {
        std::vector<LambdaCell> cells = run_lambda_grid(cfg, seeds);
        std::ofstream os(std::filesystem::path(out_dir) / "lambda_grid.csv", std::ios::binary);
        write_lambda_csv(os, cells);
        write_lambda_csv(std::cout, cells);
    } else {
        std::vector<AblationRow> rows = run_loss_ablation(cfg, seeds);
        std::ofstream os(std::filesystem::path(out_dir) / "ablation.csv", std::ios::binary);
        write_ablation_csv(os, rows);
        write_ablation_csv(std::cout, rows);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unsupervised visible-infrared re-identification on embedding vectors"};
    app.require_subcommand(1);

    std::string spec_path, out_path, config_path, out_dir = "run", checkpoint_path, data_path;
    std::string match_out;
    double eps = 0.5;
    int min_pts = 4, shortlist = 2, seeds = 1;
    bool lambda_grid = false;

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic embedding dataset");
    gen->add_option("--spec", spec_path, "generator spec file")->required();
    gen->add_option("--out", out_path, "output embedding file")->required();

    CLI::App* train = app.add_subcommand("train", "run the full three-stage pipeline");
    train->add_option("--config", config_path, "training config file")->required();
    train->add_option("--out-dir", out_dir, "artifact directory")->required();

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    eval_cmd->add_option("--data", data_path, "embedding file")->required();

    CLI::App* match = app.add_subcommand("match", "cluster and match the two modalities");
    match->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    match->add_option("--data", data_path, "embedding file")->required();
    match->add_option("--out", match_out, "write the match CSV here instead of stdout");
    match->add_option("--eps", eps, "DBSCAN cosine-distance radius");
    match->add_option("--min-pts", min_pts, "DBSCAN min_pts");
    match->add_option("--shortlist", shortlist, "SFM vote shortlist size");

    CLI::App* report = app.add_subcommand("report", "summarize run CSVs from a directory");
    report->add_option("--dir", out_dir, "run directory")->required();

    CLI::App* ablate = app.add_subcommand("ablate", "run the loss-combination ablation grid");
    ablate->add_option("--config", config_path, "base training config")->required();
    ablate->add_option("--out-dir", out_dir, "where to write the grid CSV");
    ablate->add_flag("--lambda-grid", lambda_grid, "run the 3x3 lambda grid instead");
    ablate->add_option("--seeds", seeds, "seeds per cell (medians reported)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(spec_path, out_path);
        if (train->parsed()) return cmd_train(config_path, out_dir);
        if (eval_cmd->parsed()) return cmd_eval(checkpoint_path, data_path);
        if (match->parsed()) return cmd_match(checkpoint_path, data_path, match_out, eps, min_pts, shortlist);
        if (report->parsed()) return cmd_report(out_dir);
        if (ablate->parsed()) return cmd_ablate(config_path, out_dir, lambda_grid, seeds);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
