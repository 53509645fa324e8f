#include "pxy/methods.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

#include "pxy/binary_io.hpp"
#include "pxy/errors.hpp"
#include "pxy/evaluation.hpp"

namespace pxy {

namespace {

constexpr std::array<std::string_view, 7> method_names = {
    "sparse", "logistic", "pca", "eszsl", "deep-proxy-plain", "deep-proxy-svd", "deep-proxy-offset"};
constexpr std::uint32_t container_version = 1;

GStarVariant variant_of(Method m) {
    switch (m) {
        case Method::deep_proxy_plain: return GStarVariant::plain;
        case Method::deep_proxy_svd: return GStarVariant::svd;
        case Method::deep_proxy_offset: return GStarVariant::offset;
        default: throw InvalidConfig(std::string(to_string(m)) + " is not a deep-proxy method");
    }
}

void check_styles(const StyleVocabulary& data, const StyleVocabulary& g) {
    if (data == g) return;
    std::vector<std::string> missing;
    for (const auto& s : data.names())
        if (!g.find(s)) missing.push_back(s);
    for (const auto& s : g.names())
        if (!data.find(s)) missing.push_back(s);
    if (missing.empty()) throw DataError("dataset styles are ordered differently from the columns of G");
    throw VocabularyError(missing);
}

void check_axes(const FeatureDataset& data, const CategoryAttributeMatrix& g) {
    validate(g);
    check_styles(data.styles, g.styles);
}

template <class Fn>
std::string to_bytes(Fn&& write) {
    std::ostringstream s(std::ios::binary);
    write(s);
    return s.str();
}

template <class Fn>
auto from_bytes(std::string_view bytes, Fn&& read) {
    std::istringstream s(std::string(bytes), std::ios::binary);
    return read(s);
}

double validation_auc(const TrainedModel& model, const FeatureDataset& val, const TernaryMatrix& labels) {
    const Matrix scores = predict_attribute_scores(model, val.features);
    EvalOptions opt;
    return evaluate(scores, labels, model.g.elements.names(), opt).mean_auc();
}

}  // namespace

std::string_view to_string(Method m) {
    const auto i = static_cast<std::size_t>(m);
    if (i >= method_names.size()) throw InvalidConfig("unknown method code");
    return method_names[i];
}

Method parse_method(std::string_view name) {
    const std::string norm = normalize_term(name);
    for (std::size_t i = 0; i < method_names.size(); ++i)
        if (norm == method_names[i]) return static_cast<Method>(i);
    throw InvalidConfig("unknown method '" + std::string(name) +
                        "' (expected sparse, logistic, pca, eszsl, deep-proxy-plain, deep-proxy-svd or deep-proxy-offset)");
}

bool is_deep_proxy(Method m) {
    return m == Method::deep_proxy_plain || m == Method::deep_proxy_svd || m == Method::deep_proxy_offset;
}

TrainedModel train_method(Method method, const FeatureDataset& data, const CategoryAttributeMatrix& g,
                          const MethodParams& params) {
    check_axes(data, g);
    TrainedModel model;
    model.method = method;
    model.g = g;
    switch (method) {
        case Method::sparse: {
            if (!(params.lambda_s >= 0.0)) throw InvalidConfig("lambda_s must be nonnegative");
            TrainConfig cfg = params.train;
            cfg.activation_l1 = 0.0;
            cfg.weight_l1 = 0.0;
            model.lambda_s = params.lambda_s;
            model.classifier = train_style_classifier(data, cfg);
            break;
        }
        case Method::logistic: model.logistic = train_logistic(data, g.g, params.train); break;
        case Method::pca: model.pca = fit_pca_proxy(data, params.variance_target); break;
        case Method::eszsl: model.eszsl = fit_eszsl(data, g.g, params.lambda1, params.lambda2); break;
        default:
            model.deep = train_deep_proxy(data, g.g, variant_of(method), params.train, params.pre_shift);
            break;
    }
    return model;
}

Matrix predict_attribute_scores(const TrainedModel& model, const Matrix& features) {
    switch (model.method) {
        case Method::sparse: {
            const Matrix fs = predict_styles(*model.classifier, features);
            Matrix out(fs.rows(), model.g.g.rows());
            for (Eigen::Index i = 0; i < fs.rows(); ++i)
                out.row(i) = sparse_code_attributes(fs.row(i).transpose(), model.g.g, model.lambda_s).transpose();
            return out;
        }
        case Method::logistic: return predict_attributes(*model.logistic, features);
        case Method::pca: return predict_pca_proxy(*model.pca, model.g.g, features);
        case Method::eszsl: return predict_eszsl(*model.eszsl, features);
        default: return predict_attributes(*model.deep, features);
    }
}

Matrix predict_style_scores(const TrainedModel& model, const Matrix& features) {
    if (model.method == Method::sparse) return predict_styles(*model.classifier, features);
    if (is_deep_proxy(model.method)) return predict_styles(*model.deep, features);
    throw InvalidConfig(std::string(to_string(model.method)) + " has no style output");
}

std::string_view grid_parameter(Method method) {
    switch (method) {
        case Method::sparse: return "lambda_s";
        case Method::logistic: return "lambda_l";
        case Method::pca: return "variance_target";
        case Method::eszsl: return "lambda1,lambda2";
        default: return "lambda";
    }
}

Selection train_select(Method method, const FeatureDataset& data, const CategoryAttributeMatrix& g,
                       const MethodParams& params, const std::vector<double>& grid, const FeatureDataset& val_data,
                       const TernaryMatrix& val_labels, const std::vector<double>& grid2) {
    if (grid.empty()) throw InvalidConfig("empty hyperparameter grid");
    check_styles(val_data.styles, g.styles);
    Selection sel;
    double best = -std::numeric_limits<double>::infinity();
    auto consider = [&](TrainedModel&& model, double v, double v2) {
        const double score = validation_auc(model, val_data, val_labels);
        sel.grid.push_back({v, v2, score});
        if (score > best) {
            best = score;
            sel.chosen = sel.grid.size() - 1;
            sel.model = std::move(model);
        }
    };

    if (method == Method::sparse) {
        // The classifier does not depend on lambda_s; train it once.
        MethodParams p = params;
        TrainedModel base = train_method(method, data, g, p);
        for (const double v : grid) {
            if (!(v >= 0.0)) throw InvalidConfig("lambda_s must be nonnegative");
            TrainedModel m = base;
            m.lambda_s = v;
            consider(std::move(m), v, 0.0);
        }
    } else if (method == Method::eszsl) {
        for (const double a : grid)
            for (const double b : grid2.empty() ? grid : grid2) {
                MethodParams p = params;
                p.lambda1 = a;
                p.lambda2 = b;
                consider(train_method(method, data, g, p), a, b);
            }
    } else {
        for (const double v : grid) {
            MethodParams p = params;
            if (method == Method::logistic) p.train.weight_l1 = v;
            else if (method == Method::pca) p.variance_target = v;
            else p.train.activation_l1 = v;
            consider(train_method(method, data, g, p), v, 0.0);
        }
    }
    if (!std::isfinite(best)) throw DegenerateInput("no validation element has both relevant and irrelevant samples");
    return sel;
}

void write_model(std::ostream& out, const TrainedModel& model) {
    validate(model.g);
    detail::ByteWriter w;
    w.raw("PXYR");
    w.u32(container_version);
    w.u32(static_cast<std::uint32_t>(model.method));
    w.u32(static_cast<std::uint32_t>(model.g.provenance));
    w.u32(static_cast<std::uint32_t>(model.g.elements.size()));
    for (const auto& e : model.g.elements.names()) w.str(e);
    w.u32(static_cast<std::uint32_t>(model.g.styles.size()));
    for (const auto& s : model.g.styles.names()) w.str(s);
    w.matrix_f64(model.g.g);
    w.f64(model.lambda_s);
    switch (model.method) {
        case Method::sparse:
            w.str(to_bytes([&](std::ostream& s) { write_style_classifier(s, *model.classifier); }));
            break;
        case Method::logistic: w.str(to_bytes([&](std::ostream& s) { write_logistic(s, *model.logistic); })); break;
        case Method::pca:
            w.matrix_f64(model.pca->mean);
            w.matrix_f64(model.pca->projection);
            w.matrix_f64(model.pca->style_encoder);
            w.f64(model.pca->retained_variance);
            break;
        case Method::eszsl:
            w.f64(model.eszsl->lambda1);
            w.f64(model.eszsl->lambda2);
            w.matrix_f64(model.eszsl->q);
            break;
        default: w.str(to_bytes([&](std::ostream& s) { write_deep_proxy(s, *model.deep); })); break;
    }
    w.seal();
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IoError("failed to write model");
}

TrainedModel read_model(std::istream& in) {
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    detail::ByteReader r(bytes, "PXYR model");
    r.expect("PXYR");
    r.verify_seal();
    if (r.u32() != container_version) r.fail("unsupported version");
    const std::uint32_t code = r.u32();
    if (code >= method_names.size()) r.fail("unknown method code");
    const std::uint32_t prov = r.u32();
    if (prov > static_cast<std::uint32_t>(Provenance::synthetic)) r.fail("unknown provenance");

    TrainedModel model;
    model.method = static_cast<Method>(code);
    model.g.provenance = static_cast<Provenance>(prov);
    std::vector<std::string> elements, styles;
    for (std::uint32_t i = 0, m = r.u32(); i < m; ++i) elements.push_back(r.str());
    for (std::uint32_t i = 0, n = r.u32(); i < n; ++i) styles.push_back(r.str());
    try {
        model.g.elements = ElementVocabulary(elements);
        model.g.styles = StyleVocabulary(styles);
    } catch (const Error& e) {
        r.fail(e.what());
    }
    model.g.g = r.matrix_f64();
    if (model.g.g.rows() != static_cast<Eigen::Index>(elements.size()) ||
        model.g.g.cols() != static_cast<Eigen::Index>(styles.size()))
        r.fail("G does not match its axes");
    model.lambda_s = r.f64();

    const auto m = model.g.g.rows();
    const auto n = model.g.g.cols();
    auto nested = [&](auto reader) {
        const std::string blob = r.str();
        return from_bytes(blob, reader);
    };
    switch (model.method) {
        case Method::sparse: {
            model.classifier = nested(read_style_classifier);
            if (model.classifier->net.output_dim() != n) r.fail("classifier width does not match G");
            break;
        }
        case Method::logistic: {
            model.logistic = nested(read_logistic);
            if (model.logistic->net.output_dim() != m) r.fail("network width does not match G");
            break;
        }
        case Method::pca: {
            PcaProxyModel p;
            const Matrix mean = r.matrix_f64();
            if (mean.cols() != 1) r.fail("PCA mean must be a column");
            p.mean = mean;
            p.projection = r.matrix_f64();
            p.style_encoder = r.matrix_f64();
            p.retained_variance = r.f64();
            if (p.projection.cols() != p.mean.rows() ||
                p.style_encoder.rows() != p.projection.rows() || p.style_encoder.cols() != n)
                r.fail("inconsistent PCA shapes");
            model.pca = std::move(p);
            break;
        }
        case Method::eszsl: {
            EszslModel e;
            e.lambda1 = r.f64();
            e.lambda2 = r.f64();
            e.q = r.matrix_f64();
            if (e.q.cols() != m) r.fail("ESZSL map does not match G");
            model.eszsl = std::move(e);
            break;
        }
        default: {
            model.deep = nested(read_deep_proxy);
            if (model.deep->net.output_dim() != n || model.deep->gstar.matrix().rows() != m)
                r.fail("network does not match G");
            if (model.deep->gstar.variant() != variant_of(model.method)) r.fail("G* variant does not match the method");
            break;
        }
    }
    r.finish();
    return model;
}

}  // namespace pxy
