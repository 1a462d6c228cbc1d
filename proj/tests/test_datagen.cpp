#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "oracles.hpp"
#include "uvireid/dataset.hpp"
#include "uvireid/errors.hpp"

using namespace uvireid;

namespace {
GenSpec base_spec() {
    GenSpec spec;
    spec.num_identities = 4;
    spec.samples_per_identity = 6;
    spec.dim = 12;
    spec.seed = 11;
    return spec;
}
}  // namespace

TEST_CASE("zero noise and zero gap collapse each identity to one point") {
    GenSpec spec = base_spec();
    spec.sigma_id = 0.0;
    spec.delta_mod = 0.0;
    spec.sigma_aug = 0.0;
    EmbeddingDataset ds = generate(spec);
    for (int id = 0; id < spec.num_identities; ++id) {
        const std::vector<double>* ref = nullptr;
        for (const SampleRecord& s : ds.samples) {
            if (s.identity != id) continue;
            if (!ref)
                ref = &s.feature;
            else
                CHECK(s.feature == *ref);  // bitwise, across modalities and views
        }
    }
}

TEST_CASE("tight spread keeps samples assignable to their own identity") {
    // Nearest-centroid oracle: per-identity mean vs every sample.
    for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        GenSpec spec = base_spec();
        spec.num_identities = 2;
        spec.sigma_id = 0.01;
        spec.delta_mod = 0.0;
        spec.seed = seed;
        EmbeddingDataset ds = generate(spec);

        std::vector<std::vector<double>> centroid(2, std::vector<double>(static_cast<size_t>(spec.dim), 0.0));
        std::vector<int> count(2, 0);
        for (const SampleRecord& s : ds.samples) {
            for (int j = 0; j < spec.dim; ++j) centroid[static_cast<size_t>(s.identity)][static_cast<size_t>(j)] += s.feature[static_cast<size_t>(j)];
            ++count[static_cast<size_t>(s.identity)];
        }
        for (int k = 0; k < 2; ++k)
            for (double& v : centroid[static_cast<size_t>(k)]) v /= count[static_cast<size_t>(k)];

        for (const SampleRecord& s : ds.samples) {
            double s0 = oracle::dotv(s.feature, centroid[0]);
            double s1 = oracle::dotv(s.feature, centroid[1]);
            CHECK((s0 > s1 ? 0 : 1) == s.identity);
        }
    }
}

TEST_CASE("sigma_aug zero makes the augmented view a bitwise copy") {
    GenSpec spec = base_spec();
    spec.sigma_aug = 0.0;
    EmbeddingDataset ds = generate(spec);
    int checked = 0;
    for (int i = 0; i < ds.size(); ++i) {
        int twin = ds.augmented_of[static_cast<size_t>(i)];
        if (twin < 0) continue;
        CHECK(ds.samples[static_cast<size_t>(i)].feature == ds.samples[static_cast<size_t>(twin)].feature);
        ++checked;
    }
    CHECK(checked == spec.num_identities * spec.samples_per_identity);
}

TEST_CASE("same seed reproduces the dataset exactly") {
    GenSpec spec = base_spec();
    EmbeddingDataset a = generate(spec);
    EmbeddingDataset b = generate(spec);
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i)
        CHECK(a.samples[static_cast<size_t>(i)].feature == b.samples[static_cast<size_t>(i)].feature);
}

TEST_CASE("save/load round trip preserves features bit for bit") {
    GenSpec spec = base_spec();
    EmbeddingDataset ds = generate(spec);
    auto path = std::filesystem::temp_directory_path() / "uvireid_roundtrip.emb";
    save_dataset(ds, path);
    EmbeddingDataset loaded = load_dataset(path);
    REQUIRE(loaded.size() == ds.size());
    REQUIRE(loaded.dim == ds.dim);
    for (int i = 0; i < ds.size(); ++i) {
        const SampleRecord& a = ds.samples[static_cast<size_t>(i)];
        const SampleRecord& b = loaded.samples[static_cast<size_t>(i)];
        CHECK(a.feature == b.feature);
        CHECK(a.identity == b.identity);
        CHECK(a.modality == b.modality);
        CHECK(a.camera == b.camera);
        CHECK(a.view == b.view);
    }
    std::filesystem::remove(path);
}

TEST_CASE("row with wrong field count names the line") {
    auto path = std::filesystem::temp_directory_path() / "uvireid_badrow.emb";
    {
        std::ofstream os(path);
        os << "uvireid-emb v1 dim=2\n";
        os << "0,V,0,O,0.6,0.8\n";
        os << "0,V,0,O,1.0\n";  // missing a coordinate
    }
    try {
        load_dataset(path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("hand-built external file loads with validated dimensions") {
    auto path = std::filesystem::temp_directory_path() / "uvireid_external.emb";
    {
        std::ofstream os(path);
        int d = 64;
        os << "uvireid-emb v1 dim=" << d << "\n";
        std::mt19937_64 rng(5);
        for (int i = 0; i < 100; ++i) {
            auto v = oracle::random_unit_vec(rng, d);
            os << (i % 10) << ',' << (i % 2 == 0 ? 'V' : 'I') << ",0,O";
            char buf[40];
            for (double x : v) {
                std::snprintf(buf, sizeof buf, "%.17g", x);
                os << ',' << buf;
            }
            os << '\n';
        }
    }
    EmbeddingDataset ds = load_dataset(path);
    CHECK(ds.size() == 100);
    CHECK(ds.dim == 64);
    for (const SampleRecord& s : ds.samples) CHECK(std::fabs(l2_norm(s.feature) - 1.0) < 1e-9);
    std::filesystem::remove(path);
}

TEST_CASE("non-unit row is rejected") {
    auto path = std::filesystem::temp_directory_path() / "uvireid_nonunit.emb";
    {
        std::ofstream os(path);
        os << "uvireid-emb v1 dim=2\n";
        os << "0,V,0,O,1.0,1.0\n";
    }
    CHECK_THROWS_AS(load_dataset(path), DataError);
    std::filesystem::remove(path);
}

TEST_CASE("dim below 2 is a config error") {
    GenSpec spec = base_spec();
    spec.dim = 1;
    CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("modality gap grows strictly with delta_mod") {
    for (uint64_t seed : {21ull, 22ull, 23ull, 24ull, 25ull}) {
        double prev = -1.0;
        for (double delta : {0.0, 0.2, 0.4, 0.8}) {
            GenSpec spec = base_spec();
            spec.seed = seed;
            spec.delta_mod = delta;
            EmbeddingDataset ds = generate(spec);

            double mean_gap = 0.0;
            for (int id = 0; id < spec.num_identities; ++id) {
                std::vector<double> cv(static_cast<size_t>(spec.dim), 0.0), ci(static_cast<size_t>(spec.dim), 0.0);
                int nv = 0, ni = 0;
                for (const SampleRecord& s : ds.samples) {
                    if (s.identity != id || s.view != View::Original) continue;
                    auto& acc = s.modality == Modality::Visible ? cv : ci;
                    for (int j = 0; j < spec.dim; ++j) acc[static_cast<size_t>(j)] += s.feature[static_cast<size_t>(j)];
                    (s.modality == Modality::Visible ? nv : ni) += 1;
                }
                double gap = 0.0;
                for (int j = 0; j < spec.dim; ++j) {
                    double diff = cv[static_cast<size_t>(j)] / nv - ci[static_cast<size_t>(j)] / ni;
                    gap += diff * diff;
                }
                mean_gap += std::sqrt(gap);
            }
            mean_gap /= spec.num_identities;
            CHECK(mean_gap > prev);
            prev = mean_gap;
        }
    }
}
