#include "uvireid/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "uvireid/errors.hpp"

namespace uvireid {

const char* to_string(PlcMode m) {
    switch (m) {
        case PlcMode::ClusterNce: return "nce";
        case PlcMode::Static: return "splc";
        case PlcMode::Dynamic: return "dplc";
    }
    return "dplc";
}

const char* to_string(MatcherKind m) { return m == MatcherKind::Sfm ? "sfm" : "greedy"; }

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct KvEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

// `key = value` per line, '#' starts a comment, blank lines ignored.
std::map<std::string, KvEntry> parse_kv(const std::string& text, const std::string& origin) {
    std::map<std::string, KvEntry> out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (out.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[key] = {value, lineno, false};
    }
    return out;
}

class KvReader {
public:
    KvReader(std::string text, std::string origin)
        : origin_(std::move(origin)), entries_(parse_kv(text, origin_)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        return it->second.value;
    }

    double get_double(const std::string& key, double fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        try {
            size_t pos = 0;
            double v = std::stod(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(key, "expected a number, got '" + it->second.value + "'");
        }
    }

    int get_int(const std::string& key, int fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        try {
            size_t pos = 0;
            int v = std::stoi(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(key, "expected an integer, got '" + it->second.value + "'");
        }
    }

    uint64_t get_u64(const std::string& key, uint64_t fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        try {
            size_t pos = 0;
            uint64_t v = std::stoull(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(key, "expected an unsigned integer, got '" + it->second.value + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        const std::string& v = it->second.value;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail(key, "expected a boolean, got '" + v + "'");
    }

    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        std::vector<int> out;
        std::istringstream is(it->second.value);
        std::string item;
        while (std::getline(is, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                out.push_back(std::stoi(item));
            } catch (const std::exception&) {
                fail(key, "expected a comma-separated integer list");
            }
        }
        return out;
    }

    void reject_unknown() const {
        for (const auto& [key, entry] : entries_)
            if (!entry.used)
                throw ConfigError(origin_ + ":" + std::to_string(entry.line) +
                                  ": unknown key '" + key + "'");
    }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(origin_ + ": key '" + key + "': " + what);
    }

    std::string origin_;
    std::map<std::string, KvEntry> entries_;
};

void read_gen_keys(KvReader& kv, GenSpec& gen) {
    gen.num_identities = kv.get_int("identities", gen.num_identities);
    gen.samples_per_identity = kv.get_int("samples_per_identity", gen.samples_per_identity);
    gen.dim = kv.get_int("dim", gen.dim);
    gen.sigma_id = kv.get_double("sigma_id", gen.sigma_id);
    gen.delta_mod = kv.get_double("delta_mod", gen.delta_mod);
    gen.sigma_aug = kv.get_double("sigma_aug", gen.sigma_aug);
    gen.seed = kv.get_u64("seed", gen.seed);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

void TrainConfig::validate() const {
    if (data_path.empty()) gen.validate();
    if (encoder_hidden < 0) throw ConfigError("config: encoder_hidden must be >= 0");
    if (tau <= 0) throw ConfigError("config: tau must be positive");
    if (ema < 0 || ema > 1) throw ConfigError("config: ema must lie in [0, 1]");
    if (static_w < 0 || static_w > 1) throw ConfigError("config: static_w must lie in [0, 1]");
    if (dbscan_eps <= 0 || dbscan_eps >= 2) throw ConfigError("config: dbscan_eps must lie in (0, 2)");
    if (dbscan_min_pts < 1) throw ConfigError("config: dbscan_min_pts must be >= 1");
    if (lambda_cma < 0 || lambda_lfc < 0) throw ConfigError("config: lambda weights must be >= 0");
    if (lr <= 0 || gan_lr <= 0) throw ConfigError("config: learning rates must be positive");
    if (warmup_steps < 0) throw ConfigError("config: warmup_steps must be >= 0");
    if (decay_factor <= 0 || decay_factor > 1) throw ConfigError("config: decay_factor must lie in (0, 1]");
    if (stage1_epochs < 0 || stage2_epochs < 0 || stage3_epochs < 0)
        throw ConfigError("config: stage epochs must be >= 0");
    if (batch < 1) throw ConfigError("config: batch must be >= 1");
    if (n_critic < 1) throw ConfigError("config: n_critic must be >= 1");
    if (clip <= 0) throw ConfigError("config: clip must be positive");
    if (bmm_iters < 1) throw ConfigError("config: bmm_iters must be >= 1");
    if (bmm_start_epoch < 1) throw ConfigError("config: bmm_start_epoch must be >= 1");
    if (label_corruption < 0 || label_corruption >= 1)
        throw ConfigError("config: label_corruption must lie in [0, 1)");
    if (sfm_every < 1) throw ConfigError("config: sfm_every must be >= 1");
    if (sfm_shortlist < 1) throw ConfigError("config: sfm_shortlist must be >= 1");
}

TrainConfig parse_train_config_text(const std::string& text, const std::string& origin) {
    KvReader kv(text, origin);
    TrainConfig cfg;
    cfg.data_path = kv.get_string("data", "");
    read_gen_keys(kv, cfg.gen);
    cfg.encoder_hidden = kv.get_int("encoder_hidden", cfg.encoder_hidden);
    cfg.tau = kv.get_double("tau", cfg.tau);
    cfg.ema = kv.get_double("ema", cfg.ema);
    std::string mode = kv.get_string("plc_mode", to_string(cfg.plc_mode));
    if (mode == "nce")
        cfg.plc_mode = PlcMode::ClusterNce;
    else if (mode == "splc")
        cfg.plc_mode = PlcMode::Static;
    else if (mode == "dplc")
        cfg.plc_mode = PlcMode::Dynamic;
    else
        throw ConfigError(origin + ": key 'plc_mode': expected nce|splc|dplc, got '" + mode + "'");
    cfg.static_w = kv.get_double("static_w", cfg.static_w);
    cfg.dbscan_eps = kv.get_double("dbscan_eps", cfg.dbscan_eps);
    cfg.dbscan_min_pts = kv.get_int("dbscan_min_pts", cfg.dbscan_min_pts);
    cfg.lambda_cma = kv.get_double("lambda_cma", cfg.lambda_cma);
    cfg.lambda_lfc = kv.get_double("lambda_lfc", cfg.lambda_lfc);
    cfg.lr = kv.get_double("lr", cfg.lr);
    cfg.gan_lr = kv.get_double("gan_lr", cfg.gan_lr);
    cfg.warmup_steps = kv.get_int("warmup_steps", cfg.warmup_steps);
    cfg.decay_epochs = kv.get_int_list("decay_epochs", cfg.decay_epochs);
    cfg.decay_factor = kv.get_double("decay_factor", cfg.decay_factor);
    cfg.stage1_epochs = kv.get_int("stage1_epochs", cfg.stage1_epochs);
    cfg.stage2_epochs = kv.get_int("stage2_epochs", cfg.stage2_epochs);
    cfg.stage3_epochs = kv.get_int("stage3_epochs", cfg.stage3_epochs);
    cfg.batch = kv.get_int("batch", cfg.batch);
    cfg.n_critic = kv.get_int("n_critic", cfg.n_critic);
    cfg.clip = kv.get_double("clip", cfg.clip);
    cfg.seed = kv.get_u64("seed", cfg.seed);
    cfg.bmm_iters = kv.get_int("bmm_iters", cfg.bmm_iters);
    cfg.bmm_start_epoch = kv.get_int("bmm_start_epoch", cfg.bmm_start_epoch);
    cfg.label_corruption = kv.get_double("label_corruption", cfg.label_corruption);
    cfg.sfm_every = kv.get_int("sfm_every", cfg.sfm_every);
    cfg.sfm_shortlist = kv.get_int("sfm_shortlist", cfg.sfm_shortlist);
    std::string matcher = kv.get_string("matcher", to_string(cfg.matcher));
    if (matcher == "sfm")
        cfg.matcher = MatcherKind::Sfm;
    else if (matcher == "greedy")
        cfg.matcher = MatcherKind::Greedy;
    else
        throw ConfigError(origin + ": key 'matcher': expected sfm|greedy, got '" + matcher + "'");
    cfg.lfc_plain_mean = kv.get_bool("lfc_plain_mean", cfg.lfc_plain_mean);
    cfg.stage3_fresh_optimizer = kv.get_bool("stage3_fresh_optimizer", cfg.stage3_fresh_optimizer);
    kv.reject_unknown();
    cfg.validate();
    return cfg;
}

TrainConfig parse_train_config(const std::filesystem::path& path) {
    return parse_train_config_text(slurp(path), path.string());
}

GenSpec parse_gen_spec_text(const std::string& text, const std::string& origin) {
    KvReader kv(text, origin);
    GenSpec gen;
    read_gen_keys(kv, gen);
    kv.reject_unknown();
    gen.validate();
    return gen;
}

GenSpec parse_gen_spec(const std::filesystem::path& path) {
    return parse_gen_spec_text(slurp(path), path.string());
}

}  // namespace uvireid
