#include "pxy/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pxy/errors.hpp"
#include "pxy/evaluation.hpp"

namespace pxy {

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
    return out;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

SyntheticWorld generate_world(const WorldConfig& config) {
    const auto m = static_cast<Eigen::Index>(config.m);
    const auto n = static_cast<Eigen::Index>(config.n);
    const auto k = static_cast<Eigen::Index>(config.k);
    const auto d = static_cast<Eigen::Index>(config.d);
    if (config.n < 2) throw InvalidConfig("a world needs at least two styles");
    if (config.m < config.n) throw InvalidConfig("a world needs at least as many attributes as styles");
    if (config.k == 0 || config.d == 0) throw InvalidConfig("sample count and feature dimension must be positive");
    if (config.map == FeatureMap::identity && config.d != config.m)
        throw InvalidConfig("the identity feature map needs d = m");
    if (!(config.noise >= 0.0) || !(config.attribute_spread >= 0.0)) throw InvalidConfig("noise levels must be nonnegative");
    if (!(config.correlation >= 0.0 && config.correlation < 1.0)) throw InvalidConfig("correlation must lie in [0, 1)");

    std::mt19937_64 rng(config.seed);
    SyntheticWorld w;
    w.config = config;

    const Matrix z = gaussian(m, n, rng);
    const Vector shared = gaussian(m, 1, rng);
    if (config.g_true.size() > 0) {
        if (config.g_true.rows() != m || config.g_true.cols() != n) throw ShapeError("supplied G_true has the wrong shape");
        require_finite(config.g_true, "G_true");
        w.g_true = config.g_true;
    } else {
        Matrix mixed = std::sqrt(1.0 - config.correlation) * z;
        mixed.colwise() += std::sqrt(config.correlation) * shared;
        w.g_true = mixed.array().tanh();
    }

    std::uniform_int_distribution<std::size_t> pick(0, config.n - 1);
    const Matrix eps = gaussian(k, m, rng);
    w.attributes.resize(k, m);
    for (Eigen::Index i = 0; i < k; ++i) {
        const std::size_t s = pick(rng);
        w.prototype.push_back(s);
        w.attributes.row(i) = w.g_true.col(static_cast<Eigen::Index>(s)).transpose() + config.attribute_spread * eps.row(i);
    }
    const Matrix style_logits = w.attributes * w.g_true;
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::Index best = 0;
        style_logits.row(i).maxCoeff(&best);
        w.labels.push_back(static_cast<std::size_t>(best));
    }

    const Matrix noise = config.noise * gaussian(k, d, rng);
    if (config.map == FeatureMap::identity) {
        w.map = Matrix::Identity(m, m);
        w.offset = Vector::Zero(m);
        w.features = w.attributes + noise;
    } else {
        w.map = gaussian(d, m, rng) / std::sqrt(static_cast<double>(m));
        w.offset = 0.1 * gaussian(d, 1, rng);
        Matrix pre = w.attributes * w.map.transpose();
        pre.rowwise() += w.offset.transpose();
        w.features = (config.map == FeatureMap::affine_tanh ? Matrix(pre.array().tanh()) : pre) + noise;
    }
    return w;
}

SyntheticWorld generate_world(std::size_t m, std::size_t n, std::size_t k, std::size_t d, double noise,
                              std::uint64_t seed) {
    WorldConfig c;
    c.m = m;
    c.n = n;
    c.k = k;
    c.d = d;
    c.noise = noise;
    c.seed = seed;
    return generate_world(c);
}

TernaryMatrix latent_labels(const SyntheticWorld& world) {
    const Matrix& a = world.attributes;
    TernaryMatrix out(a.rows(), a.cols());
    std::vector<double> col(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) col[static_cast<std::size_t>(i)] = a(i, j);
        std::sort(col.begin(), col.end());
        const std::size_t h = col.size() / 2;
        const double median = col.size() % 2 ? col[h] : 0.5 * (col[h - 1] + col[h]);
        for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = a(i, j) > median ? 1 : 0;
    }
    return out;
}

std::vector<double> recovery_score(const SyntheticWorld& world, const Matrix& predicted) {
    if (predicted.rows() != world.attributes.rows() || predicted.cols() != world.attributes.cols())
        throw ShapeError("predictions are " + std::to_string(predicted.rows()) + "x" + std::to_string(predicted.cols()) +
                         ", world is " + std::to_string(world.attributes.rows()) + "x" +
                         std::to_string(world.attributes.cols()));
    const TernaryMatrix truth = latent_labels(world);
    std::vector<double> out;
    for (Eigen::Index j = 0; j < predicted.cols(); ++j) {
        const Vector s = predicted.col(j);
        const std::vector<int> l(truth.col(j).data(), truth.col(j).data() + truth.rows());
        out.push_back(auc({s.data(), static_cast<std::size_t>(s.size())}, l));
    }
    return out;
}

Matrix perturb_g(const Matrix& g, double magnitude, std::uint64_t seed) {
    if (!(magnitude >= 0.0)) throw InvalidConfig("perturbation magnitude must be nonnegative");
    require_finite(g, "G");
    if (magnitude == 0.0 || g.size() == 0) return g;
    std::mt19937_64 rng(seed);
    const Matrix delta = gaussian(g.rows(), g.cols(), rng);
    return g + delta * (magnitude * g.norm() / delta.norm());
}

CategoryAttributeMatrix perturb_g(const CategoryAttributeMatrix& g, double magnitude, std::uint64_t seed) {
    CategoryAttributeMatrix out = g;
    out.g = perturb_g(g.g, magnitude, seed);
    return out;
}

ElementVocabulary world_elements(std::size_t m) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) names.push_back("element-" + std::to_string(j + 1));
    return ElementVocabulary(names);
}

StyleVocabulary world_styles(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t s = 0; s < n; ++s) names.push_back("style-" + std::to_string(s + 1));
    return StyleVocabulary(names);
}

FeatureDataset world_dataset(const SyntheticWorld& world) {
    return FeatureDataset{world.features, world.labels, world_styles(world.config.n)};
}

CategoryAttributeMatrix world_g(const SyntheticWorld& world) {
    CategoryAttributeMatrix g;
    g.g = world.g_true;
    g.elements = world_elements(world.config.m);
    g.styles = world_styles(world.config.n);
    g.provenance = Provenance::synthetic;
    return g;
}

GroundTruthSet world_ground_truth(const SyntheticWorld& world) {
    GroundTruthSet gt;
    for (std::size_t i = 0; i < world.labels.size(); ++i) gt.ids.push_back("sample-" + std::to_string(i + 1));
    gt.styles = world.labels;
    gt.style_vocab = world_styles(world.config.n);
    gt.elements = world_elements(world.config.m);
    gt.ternary = latent_labels(world).unaryExpr([](int v) { return v ? 1 : -1; });
    return gt;
}

void write_world(const std::string& dir, const SyntheticWorld& world) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());

    const FeatureDataset data = world_dataset(world);
    {
        auto f = open_out(root / "features.pxy", std::ios::out | std::ios::binary);
        auto l = open_out(root / "labels.txt");
        write_feature_dataset(f, l, data);
    }
    {
        auto out = open_out(root / "styles.txt");
        for (const auto& s : data.styles.names()) out << s << '\n';
    }
    const ElementVocabulary elements = world_elements(world.config.m);
    {
        auto out = open_out(root / "elements.txt");
        for (const auto& e : elements.names()) out << e << '\n';
    }
    {
        auto out = open_out(root / "g_true.csv");
        write_g_csv(out, world_g(world));
    }
    {
        auto out = open_out(root / "ground_truth.csv");
        write_ground_truth_csv(out, world_ground_truth(world));
    }
    {
        auto out = open_out(root / "attributes.csv");
        out << "sample";
        for (const auto& e : elements.names()) out << ',' << e;
        out << '\n';
        for (Eigen::Index i = 0; i < world.attributes.rows(); ++i) {
            out << "sample-" << (i + 1);
            for (Eigen::Index j = 0; j < world.attributes.cols(); ++j) out << ',' << format_real(world.attributes(i, j));
            out << '\n';
        }
    }
}

}  // namespace pxy
