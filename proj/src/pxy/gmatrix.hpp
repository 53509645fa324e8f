#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "pxy/domain.hpp"
#include "pxy/linalg.hpp"

namespace pxy {

/// Solves W_A * a_i = w_{s_i} for every style by minimum-norm least squares, where
/// W_A (d x m) holds the element embeddings as columns. Missing tokens raise a
/// VocabularyError listing every absent term.
CategoryAttributeMatrix estimate_g_from_embeddings(const EmbeddingTable& table, const ElementVocabulary& elements,
                                                   const StyleVocabulary& styles);

struct GroundTruthEstimate {
    CategoryAttributeMatrix g;
    /// Ground-truth rows averaged into G, grouped by style in vocabulary order.
    std::vector<std::size_t> selected;
};

/// Column i is the mean ternary vector of `per_style` paintings of style i drawn
/// with a seeded shuffle. DataError if a style has too few paintings.
GroundTruthEstimate estimate_g_from_ground_truth(const GroundTruthSet& gt, std::size_t per_style,
                                                 std::uint64_t seed);

enum class GStarVariant : std::uint32_t { plain = 0, svd = 1, offset = 2 };

std::string_view to_string(GStarVariant v);
GStarVariant parse_gstar_variant(std::string_view name);

/// The fixed terminal map of deep-proxy.
///
///   plain : G* = G
///   svd   : G* = U S^-2 U^t G, with T = S^-1 U^t
///   offset: G* = U S^-2 U^t (G + shift - o 1^t), SVD taken of the shifted matrix
///
/// For the offset variant the projector U S^-2 U^t is recomputed whenever the
/// offset changes and treated as a constant when differentiating.
class GStar {
public:
    GStar() = default;

    /// RankError if the variant needs rank(G) = n and G falls short
    /// (smallest singular value below 1e-8 of the largest).
    static GStar build(const Matrix& g, GStarVariant variant, double pre_shift = 1.0);

    /// Reassembles a stored map without recomputing it.
    static GStar restore(GStarVariant variant, Matrix gstar, Matrix source, double pre_shift, Vector offset);

    GStarVariant variant() const noexcept { return variant_; }
    const Matrix& matrix() const noexcept { return gstar_; }
    /// T = S^-1 U^t (n x m); empty for plain.
    const Matrix& transform() const noexcept { return transform_; }
    const Matrix& source() const noexcept { return source_; }
    double pre_shift() const noexcept { return pre_shift_; }
    const Vector& offset() const noexcept { return offset_; }

    /// G + shift - o 1^t (offset), or G.
    Matrix shifted_source() const;

    /// Replaces the offset (offset variant only), clamping at zero, and rebuilds G*.
    void set_offset(const Vector& o);

    /// dL/do from dL/dG* with the current SVD factors held fixed.
    Vector offset_gradient(const Matrix& d_gstar) const;

private:
    void rebuild();

    GStarVariant variant_ = GStarVariant::plain;
    Matrix source_;
    double pre_shift_ = 0.0;
    Vector offset_;
    Matrix projector_;  // U S^-2 U^t, m x m
    Matrix transform_;
    Matrix gstar_;
};

}  // namespace pxy
