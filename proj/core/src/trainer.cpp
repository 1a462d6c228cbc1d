#include "uvireid/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "uvireid/alignment.hpp"
#include "uvireid/errors.hpp"
#include "uvireid/plc.hpp"
#include "uvireid/rng.hpp"

namespace uvireid {

using diff::Tape;
using diff::TapedNet;
using diff::Var;

namespace {
constexpr uint64_t kStreamEncoder = 0x01;
constexpr uint64_t kStreamPair = 0x02;
constexpr uint64_t kStreamBatch = 0x03;
constexpr uint64_t kStreamGan = 0x04;
constexpr uint64_t kStreamCorruptSet = 0x05;
constexpr uint64_t kStreamCorrupt = 0x06;

// A glorot-random encoder maps every input into a narrow cone, so the first
// clustering pass sees a single cluster and the contrastive loss starts at
// zero gradient. Real pipelines start from a pretrained backbone; the
// desk-scale analog is an init that reproduces its input through the
// mirrored-relu pair h = [relu(x), relu(-x)], x = h_top - h_bottom, plus a
// small jitter. Requires hidden == 2 * dim; other widths fall back to the
// plain glorot init.
diff::Network make_encoder(int dim, int hidden, Rng& rng) {
    diff::Network net({dim, hidden, dim},
                      {diff::Activation::Relu, diff::Activation::Linear}, rng);
    if (hidden != 2 * dim) return net;
    constexpr double kJitter = 0.02;
    diff::Tensor& w1 = net.layers()[0].weight;  // (2d x d)
    diff::Tensor& w2 = net.layers()[1].weight;  // (d x 2d)
    for (int i = 0; i < w1.size(); ++i) w1[i] = kJitter * (2.0 * rng.uniform() - 1.0);
    for (int i = 0; i < w2.size(); ++i) w2[i] = kJitter * (2.0 * rng.uniform() - 1.0);
    for (int i = 0; i < dim; ++i) {
        w1[i * dim + i] += 1.0;
        w1[(dim + i) * dim + i] += -1.0;
        w2[i * 2 * dim + i] += 1.0;
        w2[i * 2 * dim + dim + i] += -1.0;
    }
    return net;
}
}  // namespace

Trainer::Trainer(TrainConfig cfg, EmbeddingDataset dataset)
    : cfg_(std::move(cfg)), dataset_(std::move(dataset)) {
    cfg_.validate();
    if (dataset_.size() == 0) throw DataError("trainer: empty dataset");
    int dim = dataset_.dim;
    int hidden = cfg_.encoder_hidden > 0 ? cfg_.encoder_hidden : 2 * dim;
    Rng enc_rng = Rng::derive(cfg_.seed, kStreamEncoder);
    encoder_ = make_encoder(dim, hidden, enc_rng);
    Rng pair_rng = Rng::derive(cfg_.seed, kStreamPair);
    pair_ = make_translation_pair(dim, cfg_.clip, pair_rng);
    sample_weight_.assign(static_cast<size_t>(dataset_.size()), cfg_.static_w);

    corrupt_candidate_.assign(static_cast<size_t>(dataset_.size()), 0);
    corrupted_now_.assign(static_cast<size_t>(dataset_.size()), 0);
    if (cfg_.label_corruption > 0.0) {
        std::vector<int> originals;
        for (int i = 0; i < dataset_.size(); ++i)
            if (dataset_.samples[static_cast<size_t>(i)].view == View::Original)
                originals.push_back(i);
        Rng rng = Rng::derive(cfg_.seed, kStreamCorruptSet);
        rng.shuffle(originals);
        size_t count = static_cast<size_t>(
            std::llround(cfg_.label_corruption * static_cast<double>(originals.size())));
        for (size_t i = 0; i < count && i < originals.size(); ++i)
            corrupt_candidate_[static_cast<size_t>(originals[i])] = 1;
    }
}

FeatureMatrix Trainer::extract_features() const {
    FeatureMatrix fm(dataset_.dim);
    std::vector<double> buf;
    for (const SampleRecord& s : dataset_.samples) {
        diff::Tensor out = encoder_.apply(s.feature);
        buf.assign(out.data(), out.data() + out.size());
        l2_normalize_inplace(buf);
        fm.append(buf);
    }
    return fm;
}

void Trainer::recluster(const FeatureMatrix& feats, int global_epoch) {
    std::vector<int> v_rows = dataset_.originals(Modality::Visible);
    std::vector<int> i_rows = dataset_.originals(Modality::Infrared);
    FeatureMatrix fv(dataset_.dim), fi(dataset_.dim);
    for (int r : v_rows) fv.append(feats.row(r));
    for (int r : i_rows) fi.append(feats.row(r));
    PseudoLabeling lv = dbscan(fv, cfg_.dbscan_eps, cfg_.dbscan_min_pts);
    PseudoLabeling li = dbscan(fi, cfg_.dbscan_eps, cfg_.dbscan_min_pts);
    if (lv.num_clusters == 0 || li.num_clusters == 0)
        throw ConfigError("clustering produced zero clusters in a modality; "
                          "loosen dbscan_eps or lower dbscan_min_pts");
    labels_ = relabel(dataset_, lv, li, v_rows, i_rows);
    corrupt_labels(global_epoch);
}

void Trainer::corrupt_labels(int global_epoch) {
    std::fill(corrupted_now_.begin(), corrupted_now_.end(), 0);
    if (cfg_.label_corruption > 0.0) {
        Rng rng = Rng::derive(cfg_.seed, kStreamCorrupt, static_cast<uint64_t>(global_epoch));
        for (int idx = 0; idx < dataset_.size(); ++idx) {
            if (!corrupt_candidate_[static_cast<size_t>(idx)]) continue;
            int lbl = labels_.label[static_cast<size_t>(idx)];
            if (lbl < 0) continue;
            const SampleRecord& s = dataset_.samples[static_cast<size_t>(idx)];
            int k = s.modality == Modality::Visible ? labels_.k_visible : labels_.k_infrared;
            if (k < 2) continue;
            int wrong = rng.uniform_int(k - 1);
            if (wrong >= lbl) ++wrong;
            labels_.label[static_cast<size_t>(idx)] = wrong;
            corrupted_now_[static_cast<size_t>(idx)] = 1;
            int twin = dataset_.augmented_of[static_cast<size_t>(idx)];
            if (twin >= 0) labels_.label[static_cast<size_t>(twin)] = wrong;
        }
        // Membership lists follow the corrupted labels.
        for (auto& m : labels_.members_visible) m.clear();
        for (auto& m : labels_.members_infrared) m.clear();
        for (int idx : dataset_.originals(Modality::Visible)) {
            int lbl = labels_.label[static_cast<size_t>(idx)];
            if (lbl >= 0) labels_.members_visible[static_cast<size_t>(lbl)].push_back(idx);
        }
        for (int idx : dataset_.originals(Modality::Infrared)) {
            int lbl = labels_.label[static_cast<size_t>(idx)];
            if (lbl >= 0) labels_.members_infrared[static_cast<size_t>(lbl)].push_back(idx);
        }
        // Corruption may empty a cluster; drop labels pointing at empty
        // clusters back to noise so bank init stays well defined.
        for (int idx = 0; idx < dataset_.size(); ++idx) {
            int lbl = labels_.label[static_cast<size_t>(idx)];
            if (lbl < 0) continue;
            const SampleRecord& s = dataset_.samples[static_cast<size_t>(idx)];
            const auto& members = s.modality == Modality::Visible ? labels_.members_visible
                                                                  : labels_.members_infrared;
            if (members[static_cast<size_t>(lbl)].empty())
                labels_.label[static_cast<size_t>(idx)] = -1;
        }
        auto compact = [](std::vector<std::vector<int>>& members, std::vector<int>& remap) {
            std::vector<std::vector<int>> kept;
            remap.assign(members.size(), -1);
            for (size_t c = 0; c < members.size(); ++c) {
                if (members[c].empty()) continue;
                remap[c] = static_cast<int>(kept.size());
                kept.push_back(std::move(members[c]));
            }
            members = std::move(kept);
        };
        std::vector<int> remap_v, remap_i;
        compact(labels_.members_visible, remap_v);
        compact(labels_.members_infrared, remap_i);
        labels_.k_visible = static_cast<int>(labels_.members_visible.size());
        labels_.k_infrared = static_cast<int>(labels_.members_infrared.size());
        for (int idx = 0; idx < dataset_.size(); ++idx) {
            int lbl = labels_.label[static_cast<size_t>(idx)];
            if (lbl < 0) continue;
            const SampleRecord& s = dataset_.samples[static_cast<size_t>(idx)];
            labels_.label[static_cast<size_t>(idx)] =
                s.modality == Modality::Visible ? remap_v[static_cast<size_t>(lbl)]
                                                : remap_i[static_cast<size_t>(lbl)];
        }
        if (labels_.k_visible == 0 || labels_.k_infrared == 0)
            throw ConfigError("label corruption emptied a modality's clusters");
    }
}

void Trainer::build_banks(const FeatureMatrix& feats) {
    bank_v_ = MemoryBank::init(feats, labels_.members_visible, Modality::Visible, cfg_.ema);
    bank_i_ = MemoryBank::init(feats, labels_.members_infrared, Modality::Infrared, cfg_.ema);
}

void Trainer::build_pseudo_banks(const FeatureMatrix& feats) {
    // Pseudo-infrared bank: one centroid per visible cluster, translated by
    // G_VI; pseudo-visible symmetric.
    pseudo_i_ = MemoryBank::init_pseudo(feats, labels_.members_visible, pair_.gen_vi,
                                        Modality::Infrared, cfg_.ema);
    pseudo_v_ = MemoryBank::init_pseudo(feats, labels_.members_infrared, pair_.gen_iv,
                                        Modality::Visible, cfg_.ema);
}

void Trainer::refresh_match(const FeatureMatrix& feats, int stage3_epoch) {
    bool stale = match_.v_to_i.size() != static_cast<size_t>(labels_.k_visible) ||
                 match_.i_to_v.size() != static_cast<size_t>(labels_.k_infrared);
    for (int t : match_.v_to_i)
        if (t < 0 || t >= labels_.k_infrared) stale = true;
    for (int t : match_.i_to_v)
        if (t < 0 || t >= labels_.k_visible) stale = true;
    bool scheduled = (stage3_epoch - 1) % cfg_.sfm_every == 0;
    if (!stale && !scheduled) return;
    if (cfg_.matcher == MatcherKind::Sfm)
        match_ = sfm_match(feats, labels_, pair_, bank_v_, bank_i_, cfg_.sfm_shortlist);
    else
        match_ = greedy_match(bank_v_, bank_i_);
}

std::vector<Trainer::Batch> Trainer::plan_batches(int global_epoch) const {
    std::vector<int> vis, inf;
    for (int idx = 0; idx < dataset_.size(); ++idx) {
        if (labels_.label[static_cast<size_t>(idx)] < 0) continue;
        const SampleRecord& s = dataset_.samples[static_cast<size_t>(idx)];
        if (s.view != View::Original) continue;
        (s.modality == Modality::Visible ? vis : inf).push_back(idx);
    }
    if (vis.empty() || inf.empty())
        throw ConfigError("no labeled samples to batch; loosen dbscan parameters");
    Rng rng = Rng::derive(cfg_.seed, kStreamBatch, static_cast<uint64_t>(global_epoch));
    rng.shuffle(vis);
    rng.shuffle(inf);
    int b = std::min({cfg_.batch, static_cast<int>(vis.size()), static_cast<int>(inf.size())});
    int steps = std::max<size_t>(1, std::min(vis.size(), inf.size()) / static_cast<size_t>(b));
    std::vector<Batch> out;
    for (int s = 0; s < steps; ++s) {
        Batch batch;
        batch.visible.assign(vis.begin() + s * b, vis.begin() + (s + 1) * b);
        batch.infrared.assign(inf.begin() + s * b, inf.begin() + (s + 1) * b);
        out.push_back(std::move(batch));
    }
    return out;
}

double Trainer::weight_for(int sample_idx, int global_epoch) const {
    if (cfg_.plc_mode == PlcMode::Static) return cfg_.static_w;
    if (global_epoch < cfg_.bmm_start_epoch) return cfg_.static_w;  // D-PLC warm-up
    return sample_weight_[static_cast<size_t>(sample_idx)];
}

void Trainer::note(int stage, int epoch, const std::string& metric, double value) {
    curves_.push_back({stage, epoch, metric, value});
}

void Trainer::encoder_epoch(int stage, int local_epoch, bool use_mla) {
    int global_epoch = stage == 1 ? local_epoch : cfg_.stage1_epochs + local_epoch;
    enc_opt_->set_epoch(stage == 3 && cfg_.stage3_fresh_optimizer ? local_epoch : global_epoch);

    FeatureMatrix feats = extract_features();
    recluster(feats, global_epoch);
    build_banks(feats);

    std::vector<std::vector<int>> rev_v2i_target, rev_i2v_target;
    MemoryBank aligned_pv, aligned_pi;
    if (use_mla) {
        build_pseudo_banks(feats);
        refresh_match(feats, local_epoch);
        rev_v2i_target.assign(static_cast<size_t>(labels_.k_infrared), {});
        for (size_t j = 0; j < match_.v_to_i.size(); ++j)
            rev_v2i_target[static_cast<size_t>(match_.v_to_i[j])].push_back(static_cast<int>(j));
        rev_i2v_target.assign(static_cast<size_t>(labels_.k_visible), {});
        for (size_t m = 0; m < match_.i_to_v.size(); ++m)
            rev_i2v_target[static_cast<size_t>(match_.i_to_v[m])].push_back(static_cast<int>(m));
    }

    std::vector<std::pair<int, double>> epoch_losses;
    double epoch_total = 0.0, epoch_cma = 0.0, epoch_lfc = 0.0;
    int batch_count = 0;

    std::vector<Batch> batches = plan_batches(global_epoch);
    bool use_cma = use_mla && cfg_.lambda_cma > 0.0;
    bool use_lfc = use_mla && cfg_.lambda_lfc > 0.0;

    struct Seen {
        int idx;
        int label;
        std::vector<double> z;
    };

    for (const Batch& batch : batches) {
        diff::Tensor bank_v_snap = bank_v_.as_tensor();
        diff::Tensor bank_i_snap = bank_i_.as_tensor();
        if (use_mla) {
            aligned_pv = aligned_pseudo_bank(pseudo_v_, match_.v_to_i);
            aligned_pi = aligned_pseudo_bank(pseudo_i_, match_.i_to_v);
        }

        Tape tape;
        TapedNet enc(tape, encoder_);
        Var bank_v_leaf = tape.input(bank_v_snap);
        Var bank_i_leaf = tape.input(bank_i_snap);
        Var apv_leaf, api_leaf;
        if (use_lfc) {
            apv_leaf = tape.input(aligned_pv.as_tensor());
            api_leaf = tape.input(aligned_pi.as_tensor());
        }

        Var plc_sum_v, plc_sum_i, cma_sum_v, cma_sum_i;
        std::vector<Var> f_v, f_i;
        std::vector<Seen> seen_v, seen_i;
        int n_v = 0, n_i = 0;

        auto process = [&](int idx, bool visible) {
            const SampleRecord& s = dataset_.samples[static_cast<size_t>(idx)];
            int pos = labels_.label[static_cast<size_t>(idx)];
            const diff::Tensor& bank_snap = visible ? bank_v_snap : bank_i_snap;
            Var bank_leaf = visible ? bank_v_leaf : bank_i_leaf;

            Var x = tape.input(s.feature);
            Var z = tape.l2_normalize(enc(x));
            Var term;
            if (cfg_.plc_mode == PlcMode::ClusterNce) {
                term = cluster_nce_loss(tape, z, bank_leaf, pos, cfg_.tau);
            } else {
                int nearest = nearest_centroid_rows(bank_snap, z.value().values());
                term = plc_loss(tape, z, bank_leaf, pos, nearest, weight_for(idx, global_epoch),
                                cfg_.tau);
            }
            if (s.view == View::Original) epoch_losses.emplace_back(idx, term.scalar_value());

            Var& plc_sum = visible ? plc_sum_v : plc_sum_i;
            plc_sum = plc_sum.valid() ? tape.add(plc_sum, term) : term;
            (visible ? n_v : n_i) += 1;

            if (use_cma) {
                int matched = visible ? match_.v_to_i[static_cast<size_t>(pos)]
                                      : match_.i_to_v[static_cast<size_t>(pos)];
                Var cterm = cma_term(tape, z, visible ? bank_i_leaf : bank_v_leaf, matched, cfg_.tau);
                Var& cma_sum = visible ? cma_sum_v : cma_sum_i;
                cma_sum = cma_sum.valid() ? tape.add(cma_sum, cterm) : cterm;
            }
            if (use_lfc) {
                Var f = f_clu(tape, z, bank_leaf, visible ? apv_leaf : api_leaf, cfg_.tau);
                (visible ? f_v : f_i).push_back(f);
            }
            const diff::Tensor& zv = z.value();
            (visible ? seen_v : seen_i)
                .push_back({idx, pos, std::vector<double>(zv.data(), zv.data() + zv.size())});
        };

        for (int idx : batch.visible) {
            process(idx, true);
            int twin = dataset_.augmented_of[static_cast<size_t>(idx)];
            if (twin >= 0 && labels_.label[static_cast<size_t>(twin)] >= 0) process(twin, true);
        }
        for (int idx : batch.infrared) process(idx, false);

        Var loss = tape.add(tape.scale(plc_sum_v, 1.0 / n_v), tape.scale(plc_sum_i, 1.0 / n_i));
        if (use_cma) {
            Var cma = tape.add(tape.scale(cma_sum_v, 1.0 / n_v), tape.scale(cma_sum_i, 1.0 / n_i));
            epoch_cma += cma.scalar_value();
            loss = tape.add(loss, tape.scale(cma, cfg_.lambda_cma));
        }
        if (use_lfc) {
            Var lfc = tape.add(lfc_batch_loss(tape, f_v, cfg_.lfc_plain_mean),
                               lfc_batch_loss(tape, f_i, cfg_.lfc_plain_mean));
            epoch_lfc += lfc.scalar_value();
            loss = tape.add(loss, tape.scale(lfc, cfg_.lambda_lfc));
        }
        epoch_total += loss.scalar_value();
        ++batch_count;

        auto grads = tape.backward(loss);
        std::vector<diff::Tensor> g = enc.gradients(grads);
        std::vector<diff::ParamRef> params = encoder_.named_params();
        enc_opt_->step(params, g);

        // Memory updates in batch order, after the optimizer step.
        for (const Seen& s : seen_v) {
            bank_v_.ema_update(s.label, s.z);
            if (use_mla) {
                pseudo_i_.ema_update(s.label, translate(pair_.gen_vi, s.z));
                for (int m : rev_i2v_target[static_cast<size_t>(s.label)])
                    pseudo_v_.ema_update(m, s.z);
            }
        }
        for (const Seen& s : seen_i) {
            bank_i_.ema_update(s.label, s.z);
            if (use_mla) {
                pseudo_v_.ema_update(s.label, translate(pair_.gen_iv, s.z));
                for (int j : rev_v2i_target[static_cast<size_t>(s.label)])
                    pseudo_i_.ema_update(j, s.z);
            }
        }
    }

    note(stage, local_epoch, "total_loss", epoch_total / batch_count);
    if (use_cma) note(stage, local_epoch, "cma_loss", epoch_cma / batch_count);
    if (use_lfc) note(stage, local_epoch, "lfc_loss", epoch_lfc / batch_count);
    note(stage, local_epoch, "clusters_v", labels_.k_visible);
    note(stage, local_epoch, "clusters_i", labels_.k_infrared);
    note(stage, local_epoch, "lr", enc_opt_->effective_lr());
    if (use_mla && has_match()) note(stage, local_epoch, "sfm_accuracy", match_accuracy());

    finish_epoch_bmm(global_epoch, epoch_losses);
}

void Trainer::finish_epoch_bmm(int global_epoch,
                               const std::vector<std::pair<int, double>>& losses) {
    if (cfg_.plc_mode != PlcMode::Dynamic) return;
    if (losses.size() < 4) return;  // fall back to static weights this epoch
    std::vector<double> raw(losses.size());
    for (size_t i = 0; i < losses.size(); ++i) raw[i] = losses[i].second;
    std::vector<double> norm = normalize_losses(raw);
    std::optional<BmmFit> fit = fit_bmm(norm, cfg_.bmm_iters);
    if (!fit) return;
    const BetaMixture& bmm = fit->model;
    double w_corrupt = 0, w_clean = 0;
    int n_corrupt = 0, n_clean = 0;
    for (size_t i = 0; i < losses.size(); ++i) {
        int idx = losses[i].first;
        double w = bmm.posterior_noisy(norm[i]);
        sample_weight_[static_cast<size_t>(idx)] = w;
        int twin = dataset_.augmented_of[static_cast<size_t>(idx)];
        if (twin >= 0) sample_weight_[static_cast<size_t>(twin)] = w;
        if (corrupted_now_[static_cast<size_t>(idx)]) {
            w_corrupt += w;
            ++n_corrupt;
        } else {
            w_clean += w;
            ++n_clean;
        }
    }
    bmm_rows_.push_back({global_epoch, bmm.component[0].alpha, bmm.component[0].beta,
                         bmm.component[1].alpha, bmm.component[1].beta, bmm.weight[1]});
    if (n_corrupt > 0 && n_clean > 0) {
        note(0, global_epoch, "w_corrupt_mean", w_corrupt / n_corrupt);
        note(0, global_epoch, "w_clean_mean", w_clean / n_clean);
    }
}

void Trainer::run_stage1() {
    if (!enc_opt_)
        enc_opt_.emplace(diff::OptKind::Adam, cfg_.lr,
                         diff::Schedule{cfg_.warmup_steps, cfg_.decay_epochs, cfg_.decay_factor});
    for (int e = 1; e <= cfg_.stage1_epochs; ++e) encoder_epoch(1, e, false);
}

void Trainer::gan_epoch(int stage, int local_epoch, const FeatureMatrix& feats) {
    ++gan_epochs_done_;
    gan_opts_->generators.set_epoch(gan_epochs_done_);
    gan_opts_->critics.set_epoch(gan_epochs_done_);

    std::vector<int> v_rows = dataset_.originals(Modality::Visible);
    std::vector<int> i_rows = dataset_.originals(Modality::Infrared);
    Rng rng = Rng::derive(cfg_.seed, kStreamGan, static_cast<uint64_t>(gan_epochs_done_));
    rng.shuffle(v_rows);
    rng.shuffle(i_rows);
    int b = std::min({cfg_.batch, static_cast<int>(v_rows.size()), static_cast<int>(i_rows.size())});
    int steps = std::max<size_t>(1, std::min(v_rows.size(), i_rows.size()) / static_cast<size_t>(b));

    double cycle = 0, wasserstein = 0;
    for (int s = 0; s < steps; ++s) {
        FeatureMatrix bv(dataset_.dim), bi(dataset_.dim);
        for (int k = 0; k < b; ++k) {
            bv.append(feats.row(v_rows[static_cast<size_t>(s * b + k)]));
            bi.append(feats.row(i_rows[static_cast<size_t>(s * b + k)]));
        }
        GanStepStats stats = gan_step(pair_, bv, bi, *gan_opts_, cfg_.n_critic);
        cycle += stats.cycle;
        wasserstein += stats.wasserstein;
    }
    note(stage, local_epoch, "cycle", cycle / steps);
    note(stage, local_epoch, "wasserstein", wasserstein / steps);
}

void Trainer::run_stage2() {
    if (!gan_opts_)
        gan_opts_.emplace(GanOptimizers{diff::Optimizer(diff::OptKind::Adam, cfg_.gan_lr),
                                        diff::Optimizer(diff::OptKind::Adam, cfg_.gan_lr)});
    if (cfg_.stage2_epochs == 0) return;
    FeatureMatrix feats = extract_features();  // encoder frozen during stage 2
    for (int e = 1; e <= cfg_.stage2_epochs; ++e) gan_epoch(2, e, feats);
}

void Trainer::run_stage3() {
    if (!enc_opt_ || cfg_.stage3_fresh_optimizer)
        enc_opt_.emplace(diff::OptKind::Adam, cfg_.lr,
                         diff::Schedule{cfg_.warmup_steps, cfg_.decay_epochs, cfg_.decay_factor});
    if (!gan_opts_)
        gan_opts_.emplace(GanOptimizers{diff::Optimizer(diff::OptKind::Adam, cfg_.gan_lr),
                                        diff::Optimizer(diff::OptKind::Adam, cfg_.gan_lr)});
    bool use_mla = cfg_.lambda_cma > 0.0 || cfg_.lambda_lfc > 0.0;
    for (int e = 1; e <= cfg_.stage3_epochs; ++e) {
        encoder_epoch(3, e, use_mla);
        FeatureMatrix feats = extract_features();
        gan_epoch(3, e, feats);
    }
}

DirectionMetrics Trainer::evaluate_v2i() const {
    FeatureMatrix feats = extract_features();
    std::vector<int> v_rows = dataset_.originals(Modality::Visible);
    std::vector<int> i_rows = dataset_.originals(Modality::Infrared);
    FeatureMatrix q(dataset_.dim), g(dataset_.dim);
    std::vector<int> qid, gid;
    for (int r : v_rows) {
        q.append(feats.row(r));
        qid.push_back(dataset_.samples[static_cast<size_t>(r)].identity);
    }
    for (int r : i_rows) {
        g.append(feats.row(r));
        gid.push_back(dataset_.samples[static_cast<size_t>(r)].identity);
    }
    return evaluate(q, qid, g, gid);
}

DirectionMetrics Trainer::evaluate_i2v() const {
    FeatureMatrix feats = extract_features();
    std::vector<int> v_rows = dataset_.originals(Modality::Visible);
    std::vector<int> i_rows = dataset_.originals(Modality::Infrared);
    FeatureMatrix q(dataset_.dim), g(dataset_.dim);
    std::vector<int> qid, gid;
    for (int r : i_rows) {
        q.append(feats.row(r));
        qid.push_back(dataset_.samples[static_cast<size_t>(r)].identity);
    }
    for (int r : v_rows) {
        g.append(feats.row(r));
        gid.push_back(dataset_.samples[static_cast<size_t>(r)].identity);
    }
    return evaluate(q, qid, g, gid);
}

double Trainer::direction_accuracy(const EmbeddingDataset& ds,
                                   const std::vector<std::vector<int>>& src_members,
                                   const std::vector<std::vector<int>>& tgt_members,
                                   const std::vector<int>& match) {
    auto majority = [&ds](const std::vector<int>& members) {
        std::map<int, int> counts;
        for (int idx : members) ++counts[ds.samples[static_cast<size_t>(idx)].identity];
        int best_id = -1, best_count = -1;
        for (const auto& [id, count] : counts)
            if (count > best_count) {
                best_count = count;
                best_id = id;
            }
        return best_id;
    };
    if (src_members.empty() || match.size() != src_members.size())
        throw ContractError("direction_accuracy: match/member mismatch");
    int hits = 0;
    for (size_t c = 0; c < src_members.size(); ++c)
        if (majority(src_members[c]) ==
            majority(tgt_members[static_cast<size_t>(match[c])]))
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(src_members.size());
}

double Trainer::match_accuracy() const {
    if (!has_match()) return -1.0;
    double a = direction_accuracy(dataset_, labels_.members_visible, labels_.members_infrared,
                                  match_.v_to_i);
    double b = direction_accuracy(dataset_, labels_.members_infrared, labels_.members_visible,
                                  match_.i_to_v);
    return 0.5 * (a + b);
}

}  // namespace uvireid
