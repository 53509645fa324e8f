#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pxy/domain.hpp"
#include "pxy/linalg.hpp"

namespace pxy {

enum class FeatureMap : std::uint32_t { affine_tanh = 0, linear = 1, identity = 2 };

struct WorldConfig {
    std::size_t m = 12;
    std::size_t n = 6;
    std::size_t k = 2000;
    std::size_t d = 64;
    double noise = 0.1;             // feature noise std
    double attribute_spread = 0.5;  // std of attributes around their style prototype
    double correlation = 0.3;       // correlation between columns of G_true
    FeatureMap map = FeatureMap::affine_tanh;
    std::uint64_t seed = 0;
    /// Used as G_true when non-empty (m x n).
    Matrix g_true;
};

struct SyntheticWorld {
    WorldConfig config;
    Matrix g_true;      // m x n, entries in (-1, 1)
    Matrix attributes;  // k x m
    Matrix features;    // k x d
    std::vector<std::size_t> labels;     // argmax_s a^t G_true
    std::vector<std::size_t> prototype;  // style the attributes were drawn around
    Matrix map;         // d x m
    Vector offset;      // d
};

/// InvalidConfig when m < n, n < 2, or the identity map is asked for with d != m.
SyntheticWorld generate_world(const WorldConfig& config);
SyntheticWorld generate_world(std::size_t m, std::size_t n, std::size_t k, std::size_t d, double noise,
                              std::uint64_t seed);

/// 1 where the latent attribute lies above its element's median, else 0 (k x m).
TernaryMatrix latent_labels(const SyntheticWorld& world);

/// Per-element AUC of `predicted` (k x m) against latent_labels.
std::vector<double> recovery_score(const SyntheticWorld& world, const Matrix& predicted);

/// G + dG with Gaussian dG rescaled to ||dG||_F = magnitude * ||G||_F.
Matrix perturb_g(const Matrix& g, double magnitude, std::uint64_t seed);
CategoryAttributeMatrix perturb_g(const CategoryAttributeMatrix& g, double magnitude, std::uint64_t seed);

ElementVocabulary world_elements(std::size_t m);
StyleVocabulary world_styles(std::size_t n);

FeatureDataset world_dataset(const SyntheticWorld& world);
CategoryAttributeMatrix world_g(const SyntheticWorld& world);
/// Median-binarised latent attributes as a ternary ground truth (+1 above, -1 otherwise).
GroundTruthSet world_ground_truth(const SyntheticWorld& world);

/// Writes features.pxy, labels.txt, styles.txt, elements.txt, g_true.csv,
/// ground_truth.csv and attributes.csv into `dir`.
void write_world(const std::string& dir, const SyntheticWorld& world);

}  // namespace pxy
