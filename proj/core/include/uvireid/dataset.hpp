#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "uvireid/features.hpp"

namespace uvireid {

enum class Modality : uint8_t { Visible, Infrared };
enum class View : uint8_t { Original, Augmented };

struct SampleRecord {
    std::vector<double> feature;  // unit norm
    int identity = 0;             // ground truth; never shown to training ops
    Modality modality = Modality::Visible;
    int camera = 0;
    View view = View::Original;
};

// In-memory embedding dataset. Augmented rows immediately follow their
// visible original in `samples`; finalize() records the pairing.
struct EmbeddingDataset {
    int dim = 0;
    std::vector<SampleRecord> samples;
    std::vector<int> original_of;   // augmented -> original index, else -1
    std::vector<int> augmented_of;  // original -> augmented twin, else -1

    void finalize();  // builds pairing, validates norms and view rules
    int size() const { return static_cast<int>(samples.size()); }
    std::vector<int> originals(Modality m) const;
    FeatureMatrix features_of(std::span<const int> indices) const;
};

// Synthetic two-modality generator settings. Identity anchors live on the
// unit sphere; the infrared side gets a shared offset direction scaled by
// delta_mod plus a small per-identity rotation, so the modality gap is
// systematic rather than i.i.d. noise.
struct GenSpec {
    int num_identities = 20;
    int samples_per_identity = 30;  // per modality
    int dim = 64;
    double sigma_id = 0.08;
    double delta_mod = 0.35;
    double sigma_aug = 0.05;
    uint64_t seed = 1;

    void validate() const;
};

EmbeddingDataset generate(const GenSpec& spec);

// Text format: header "uvireid-emb v1 dim=<d>", then one sample per line:
// identity,modality,camera,view,f0,f1,...  (modality V|I, view O|A).
void save_dataset(const EmbeddingDataset& ds, const std::filesystem::path& path);
EmbeddingDataset load_dataset(const std::filesystem::path& path);

}  // namespace uvireid
