#include "pxy/gmatrix.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "pxy/errors.hpp"

namespace pxy {

CategoryAttributeMatrix estimate_g_from_embeddings(const EmbeddingTable& table, const ElementVocabulary& elements,
                                                   const StyleVocabulary& styles) {
    std::vector<std::string> missing;
    for (const auto& e : elements.names())
        if (!table.find(e)) missing.push_back(e);
    for (const auto& s : styles.names())
        if (!table.find(s)) missing.push_back(s);
    if (!missing.empty()) throw VocabularyError(std::move(missing));

    const auto d = static_cast<Eigen::Index>(table.dimension());
    const auto m = static_cast<Eigen::Index>(elements.size());
    const auto n = static_cast<Eigen::Index>(styles.size());
    Matrix wa(d, m), ws(d, n);
    for (Eigen::Index j = 0; j < m; ++j) wa.col(j) = *table.find(elements.name(static_cast<std::size_t>(j)));
    for (Eigen::Index j = 0; j < n; ++j) ws.col(j) = *table.find(styles.name(static_cast<std::size_t>(j)));

    CategoryAttributeMatrix g;
    g.g = solve_least_squares(wa, ws, 0.0);
    g.elements = elements;
    g.styles = styles;
    g.provenance = Provenance::embedding;
    return g;
}

GroundTruthEstimate estimate_g_from_ground_truth(const GroundTruthSet& gt, std::size_t per_style,
                                                 std::uint64_t seed) {
    validate(gt);
    if (per_style == 0) throw InvalidConfig("per-style sample count must be at least 1");

    const std::size_t n = gt.style_vocab.size();
    const auto m = static_cast<Eigen::Index>(gt.elements.size());
    std::mt19937_64 rng(seed);

    GroundTruthEstimate out;
    out.g.g = Matrix::Zero(m, static_cast<Eigen::Index>(n));
    out.g.elements = gt.elements;
    out.g.styles = gt.style_vocab;
    out.g.provenance = Provenance::ground_truth;

    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < gt.size(); ++i)
            if (gt.styles[i] == s) rows.push_back(i);
        if (rows.size() < per_style)
            throw DataError("style \"" + gt.style_vocab.name(s) + "\" has " + std::to_string(rows.size()) +
                            " annotated paintings, need " + std::to_string(per_style));
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(per_style);

        Vector col = Vector::Zero(m);
        for (const auto r : rows) col += gt.ternary.row(static_cast<Eigen::Index>(r)).transpose().cast<double>();
        out.g.g.col(static_cast<Eigen::Index>(s)) = col / static_cast<double>(per_style);
        out.selected.insert(out.selected.end(), rows.begin(), rows.end());
    }
    return out;
}

std::string_view to_string(GStarVariant v) {
    switch (v) {
        case GStarVariant::plain: return "plain";
        case GStarVariant::svd: return "svd";
        case GStarVariant::offset: return "offset";
    }
    return "?";
}

GStarVariant parse_gstar_variant(std::string_view name) {
    if (name == "plain") return GStarVariant::plain;
    if (name == "svd") return GStarVariant::svd;
    if (name == "offset") return GStarVariant::offset;
    throw InvalidConfig("unknown G* variant \"" + std::string(name) + "\" (expected plain, svd or offset)");
}

GStar GStar::build(const Matrix& g, GStarVariant variant, double pre_shift) {
    require_finite(g, "G");
    GStar s;
    s.variant_ = variant;
    s.source_ = g;
    if (variant == GStarVariant::offset) {
        s.pre_shift_ = pre_shift;
        // Starting at o = shift makes the first map the SVD map of the original G.
        s.offset_ = Vector::Constant(g.rows(), pre_shift);
    }
    s.rebuild();
    return s;
}

GStar GStar::restore(GStarVariant variant, Matrix gstar, Matrix source, double pre_shift, Vector offset) {
    GStar s;
    s.variant_ = variant;
    s.gstar_ = std::move(gstar);
    s.source_ = std::move(source);
    s.pre_shift_ = pre_shift;
    s.offset_ = std::move(offset);
    if (s.gstar_.rows() != s.source_.rows() || s.gstar_.cols() != s.source_.cols())
        throw ShapeError("stored G* and source G differ in shape");
    if (variant == GStarVariant::offset && s.offset_.size() != s.source_.rows())
        throw ShapeError("stored offset length does not match G rows");
    if (variant != GStarVariant::plain) {
        // Projector and transform are needed only for continued offset training.
        const SvdFactors f = svd_thin(s.shifted_source());
        if (f.rank() == s.source_.cols()) {
            s.projector_ = f.u * f.sigma.array().pow(-2.0).matrix().asDiagonal() * f.u.transpose();
            s.transform_ = f.sigma.cwiseInverse().asDiagonal() * f.u.transpose();
        }
    }
    return s;
}

Matrix GStar::shifted_source() const {
    if (variant_ != GStarVariant::offset) return source_;
    Matrix shifted = source_.array() + pre_shift_;
    shifted.colwise() -= offset_;
    return shifted;
}

void GStar::set_offset(const Vector& o) {
    if (variant_ != GStarVariant::offset) throw InvalidConfig("only the offset variant has a learnable offset");
    if (o.size() != source_.rows()) throw ShapeError("offset length must equal the number of elements");
    offset_ = o.cwiseMax(0.0);
    rebuild();
}

Vector GStar::offset_gradient(const Matrix& d_gstar) const {
    if (variant_ != GStarVariant::offset) throw InvalidConfig("only the offset variant has a learnable offset");
    if (d_gstar.rows() != source_.rows() || d_gstar.cols() != source_.cols())
        throw ShapeError("G* gradient has the wrong shape");
    // G* = M (G + shift - o 1^t) with M symmetric and frozen, so dL/do = -(M dL/dG*) 1.
    return -(projector_ * d_gstar).rowwise().sum();
}

void GStar::rebuild() {
    if (variant_ == GStarVariant::plain) {
        gstar_ = source_;
        projector_.resize(0, 0);
        transform_.resize(0, 0);
        return;
    }
    const Matrix shifted = shifted_source();
    const auto n = shifted.cols();
    if (shifted.rows() < n)
        throw RankError("G is " + std::to_string(shifted.rows()) + "x" + std::to_string(n) +
                        "; the SVD map needs at least as many elements as styles");
    const SvdFactors f = svd_thin(shifted);
    if (f.rank() < n || f.sigma(n - 1) < 1e-8 * f.sigma(0))
        throw RankError("G is rank deficient (rank " + std::to_string(f.rank()) + " < " + std::to_string(n) +
                        " styles); the SVD map needs full column rank");
    transform_ = f.sigma.cwiseInverse().asDiagonal() * f.u.transpose();
    projector_ = transform_.transpose() * transform_;
    gstar_ = projector_ * shifted;
}

}  // namespace pxy
