#include "uvireid/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "uvireid/rng.hpp"

namespace uvireid {

void EmbeddingDataset::finalize() {
    original_of.assign(samples.size(), -1);
    augmented_of.assign(samples.size(), -1);
    for (size_t i = 0; i < samples.size(); ++i) {
        const SampleRecord& s = samples[i];
        if (static_cast<int>(s.feature.size()) != dim)
            throw DataError("dataset: sample " + std::to_string(i) + " has wrong dimension");
        double n = l2_norm(s.feature);
        if (std::fabs(n - 1.0) > 1e-9)
            throw DataError("dataset: sample " + std::to_string(i) + " is not unit norm");
        if (s.view == View::Augmented) {
            if (s.modality != Modality::Visible)
                throw DataError("dataset: augmented view on non-visible sample " + std::to_string(i));
            if (i == 0) throw DataError("dataset: augmented sample 0 has no preceding original");
            const SampleRecord& prev = samples[i - 1];
            if (prev.view != View::Original || prev.modality != Modality::Visible ||
                prev.identity != s.identity)
                throw DataError("dataset: augmented sample " + std::to_string(i) +
                                " does not follow its visible original");
            original_of[i] = static_cast<int>(i) - 1;
            augmented_of[i - 1] = static_cast<int>(i);
        }
    }
}

std::vector<int> EmbeddingDataset::originals(Modality m) const {
    std::vector<int> out;
    for (size_t i = 0; i < samples.size(); ++i)
        if (samples[i].modality == m && samples[i].view == View::Original)
            out.push_back(static_cast<int>(i));
    return out;
}

FeatureMatrix EmbeddingDataset::features_of(std::span<const int> indices) const {
    FeatureMatrix fm(dim);
    for (int i : indices) fm.append(samples[static_cast<size_t>(i)].feature);
    return fm;
}

void GenSpec::validate() const {
    if (dim < 2) throw ConfigError("gen spec: dim must be >= 2");
    if (num_identities < 2) throw ConfigError("gen spec: num_identities must be >= 2");
    if (samples_per_identity < 1) throw ConfigError("gen spec: samples_per_identity must be >= 1");
    if (sigma_id < 0 || sigma_aug < 0 || delta_mod < 0)
        throw ConfigError("gen spec: spreads must be non-negative");
}

namespace {

std::vector<double> random_unit(Rng& rng, int dim) {
    std::vector<double> v(static_cast<size_t>(dim));
    for (double& x : v) x = rng.normal();
    l2_normalize_inplace(v);
    return v;
}

std::vector<double> noisy_copy(Rng& rng, std::span<const double> center, double sigma) {
    // sigma == 0 reproduces the center bitwise (degenerate cases in tests
    // rely on exact equality).
    std::vector<double> v(center.begin(), center.end());
    if (sigma == 0.0) return v;
    for (double& x : v) x += sigma * rng.normal();
    l2_normalize_inplace(v);
    return v;
}

}  // namespace

EmbeddingDataset generate(const GenSpec& spec) {
    spec.validate();
    Rng rng = Rng::derive(spec.seed, 0x6765);

    std::vector<double> offset_dir = random_unit(rng, spec.dim);

    std::vector<std::vector<double>> anchors_v, anchors_i;
    for (int k = 0; k < spec.num_identities; ++k) {
        std::vector<double> anchor = random_unit(rng, spec.dim);
        std::vector<double> axis = random_unit(rng, spec.dim);
        std::vector<double> center_i;
        if (spec.delta_mod == 0.0) {
            center_i = anchor;
        } else {
            // Small in-plane rotation toward a per-identity axis, then the
            // shared offset direction.
            double proj = dot(axis, anchor);
            for (size_t j = 0; j < axis.size(); ++j) axis[j] -= proj * anchor[j];
            l2_normalize_inplace(axis);
            double theta = 0.3 * spec.delta_mod;
            center_i.resize(axis.size());
            for (size_t j = 0; j < axis.size(); ++j)
                center_i[j] = std::cos(theta) * anchor[j] + std::sin(theta) * axis[j] +
                              spec.delta_mod * offset_dir[j];
            l2_normalize_inplace(center_i);
        }
        anchors_v.push_back(std::move(anchor));
        anchors_i.push_back(std::move(center_i));
    }

    EmbeddingDataset ds;
    ds.dim = spec.dim;
    for (int k = 0; k < spec.num_identities; ++k) {
        for (int s = 0; s < spec.samples_per_identity; ++s) {
            SampleRecord orig;
            orig.feature = noisy_copy(rng, anchors_v[static_cast<size_t>(k)], spec.sigma_id);
            orig.identity = k;
            orig.modality = Modality::Visible;
            orig.camera = s % 2;
            orig.view = View::Original;

            SampleRecord aug;
            aug.feature = noisy_copy(rng, orig.feature, spec.sigma_aug);
            aug.identity = k;
            aug.modality = Modality::Visible;
            aug.camera = orig.camera;
            aug.view = View::Augmented;

            ds.samples.push_back(std::move(orig));
            ds.samples.push_back(std::move(aug));
        }
        for (int s = 0; s < spec.samples_per_identity; ++s) {
            SampleRecord rec;
            rec.feature = noisy_copy(rng, anchors_i[static_cast<size_t>(k)], spec.sigma_id);
            rec.identity = k;
            rec.modality = Modality::Infrared;
            rec.camera = 2 + s % 2;
            rec.view = View::Original;
            ds.samples.push_back(std::move(rec));
        }
    }
    ds.finalize();
    return ds;
}

void save_dataset(const EmbeddingDataset& ds, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open dataset file for writing: " + path.string());
    os << "uvireid-emb v1 dim=" << ds.dim << "\n";
    char buf[40];
    for (const SampleRecord& s : ds.samples) {
        os << s.identity << ',' << (s.modality == Modality::Visible ? 'V' : 'I') << ','
           << s.camera << ',' << (s.view == View::Original ? 'O' : 'A');
        for (double v : s.feature) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << ',' << buf;
        }
        os << '\n';
    }
    if (!os) throw DataError("dataset write failed: " + path.string());
}

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const std::string& what) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

EmbeddingDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open dataset file: " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw DataError(path.string() + ": empty file");
    int dim = 0;
    if (std::sscanf(line.c_str(), "uvireid-emb v1 dim=%d", &dim) != 1 || dim < 2)
        parse_fail(path, 1, "bad header (expected 'uvireid-emb v1 dim=<d>')");

    EmbeddingDataset ds;
    ds.dim = dim;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t start = 0;
        while (true) {
            size_t pos = line.find(',', start);
            fields.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (static_cast<int>(fields.size()) != 4 + dim)
            parse_fail(path, lineno,
                       "expected " + std::to_string(4 + dim) + " fields, got " +
                           std::to_string(fields.size()));
        SampleRecord rec;
        try {
            rec.identity = std::stoi(fields[0]);
        } catch (const std::exception&) {
            parse_fail(path, lineno, "bad identity field: " + fields[0]);
        }
        if (rec.identity < 0) parse_fail(path, lineno, "identity must be >= 0");
        if (fields[1] == "V")
            rec.modality = Modality::Visible;
        else if (fields[1] == "I")
            rec.modality = Modality::Infrared;
        else
            parse_fail(path, lineno, "bad modality field: " + fields[1]);
        try {
            rec.camera = std::stoi(fields[2]);
        } catch (const std::exception&) {
            parse_fail(path, lineno, "bad camera field: " + fields[2]);
        }
        if (fields[3] == "O")
            rec.view = View::Original;
        else if (fields[3] == "A")
            rec.view = View::Augmented;
        else
            parse_fail(path, lineno, "bad view field: " + fields[3]);
        rec.feature.reserve(static_cast<size_t>(dim));
        for (int j = 0; j < dim; ++j) {
            const std::string& f = fields[static_cast<size_t>(4 + j)];
            char* end = nullptr;
            double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0')
                parse_fail(path, lineno, "bad float field: " + f);
            rec.feature.push_back(v);
        }
        ds.samples.push_back(std::move(rec));
    }
    try {
        ds.finalize();
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return ds;
}

}  // namespace uvireid
