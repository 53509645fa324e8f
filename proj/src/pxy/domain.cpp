#include "pxy/domain.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "pxy/errors.hpp"

namespace pxy {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool getline_stripped(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<int> parse_int(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void check_name(const std::string& name, const char* kind) {
    if (name.find(',') != std::string::npos)
        throw FormatError(std::string(kind) + " name contains a comma: " + name);
}

// Parses `painting_id,style,<elements...>`.
std::vector<std::string> read_painting_header(std::istream& in) {
    std::string line;
    if (!getline_stripped(in, line)) throw FormatError("missing header", 1);
    const auto fields = split_csv(line);
    if (fields.size() < 3 || fields[0] != "painting_id" || fields[1] != "style")
        throw FormatError("header must start with painting_id,style and name at least one element", 1);
    std::vector<std::string> elements;
    for (std::size_t i = 2; i < fields.size(); ++i) {
        if (fields[i].empty()) throw FormatError("empty element name in header", 1);
        elements.emplace_back(fields[i]);
    }
    return elements;
}

}  // namespace

std::string normalize_term(std::string_view term) {
    term = trim(term);
    std::string out;
    out.reserve(term.size());
    bool pending_sep = false;
    for (const char ch : term) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c) || ch == '_') {
            pending_sep = true;
            continue;
        }
        if (pending_sep && !out.empty() && out.back() != '-' && ch != '-') out.push_back('-');
        pending_sep = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

Vocabulary::Vocabulary(std::vector<std::string> names, std::size_t min_size, const char* kind) {
    if (names.size() < min_size)
        throw DataError(std::string(kind) + " vocabulary needs at least " + std::to_string(min_size) +
                        " names, got " + std::to_string(names.size()));
    names_.reserve(names.size());
    for (auto& raw : names) {
        std::string n = normalize_term(raw);
        if (n.empty()) throw DataError(std::string("empty ") + kind + " name");
        if (!index_.emplace(n, names_.size()).second)
            throw DataError(std::string("duplicate ") + kind + " name: " + n);
        names_.push_back(std::move(n));
    }
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
    const auto it = index_.find(normalize_term(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Vocabulary::index_of(std::string_view term) const {
    if (auto i = find(term)) return *i;
    throw VocabularyError({std::string(trim(term))});
}

ElementVocabulary ElementVocabulary::art_elements() {
    return ElementVocabulary({
        // subject
        "representational", "non-representational",
        // line
        "blurred", "broken", "controlled", "curved", "diagonal", "horizontal", "vertical", "meandering", "thick",
        "thin", "active", "energetic", "straight",
        // texture
        "bumpy", "flat", "smooth", "gestural", "rough",
        // color
        "calm", "cool", "chromatic", "monochromatic", "muted", "warm", "transparent",
        // shape
        "ambiguous", "geometric", "amorphous", "biomorphic", "closed", "open", "distorted", "heavy", "linear",
        "organic", "abstract", "decorative", "kinetic", "light",
        // light and space
        "bright", "dark", "atmospheric", "planar", "perspective",
        // general principles
        "overlapping", "balance", "contrast", "harmony", "pattern", "repetition", "rhythm", "unity", "variety",
        "symmetry", "proportion", "parallel",
    });
}

StyleVocabulary StyleVocabulary::wikiart_styles() {
    return StyleVocabulary({
        "abstract-expressionism", "art-nouveau-modern", "baroque", "color-field-painting", "cubism",
        "early-renaissance", "expressionism", "fauvism", "high-renaissance", "impressionism", "mannerism",
        "minimalism", "naive-art-primitivism", "northern-renaissance", "pop-art", "post-impressionism", "realism",
        "rococo", "romanticism", "ukiyo-e",
    });
}

std::vector<std::string> read_name_list(std::istream& in) {
    std::vector<std::string> names;
    std::string line;
    while (getline_stripped(in, line)) {
        const auto t = trim(line);
        if (!t.empty()) names.emplace_back(t);
    }
    return names;
}

// ---------------------------------------------------------------------------

void EmbeddingTable::add(std::string_view token, Vector v) {
    if (static_cast<std::size_t>(v.size()) != dimension_)
        throw FormatError("embedding for \"" + std::string(token) + "\" has dimension " + std::to_string(v.size()) +
                          ", expected " + std::to_string(dimension_));
    std::string key = normalize_term(token);
    if (key.empty()) throw FormatError("empty embedding token");
    if (!index_.emplace(key, tokens_.size()).second) throw FormatError("duplicate embedding token: " + key);
    tokens_.push_back(std::move(key));
    vectors_.push_back(std::move(v));
}

const Vector* EmbeddingTable::find(std::string_view token) const {
    const auto it = index_.find(normalize_term(token));
    return it == index_.end() ? nullptr : &vectors_[it->second];
}

EmbeddingTable parse_embedding_table(std::istream& in) {
    std::optional<EmbeddingTable> table;
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> values;
    while (getline_stripped(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::string token;
        if (!(fields >> token)) continue;
        values.clear();
        std::string field;
        while (fields >> field) {
            const auto v = parse_real(field);
            if (!v) throw FormatError("bad number \"" + field + "\"", lineno);
            values.push_back(*v);
        }
        if (values.empty()) throw FormatError("token without vector", lineno);
        if (!table) table.emplace(values.size());
        if (values.size() != table->dimension())
            throw FormatError("expected " + std::to_string(table->dimension()) + " values, got " +
                                  std::to_string(values.size()),
                              lineno);
        try {
            table->add(token, Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
        } catch (const FormatError& e) {
            throw FormatError(e.what(), lineno);
        }
    }
    if (!table) return EmbeddingTable(0);
    return std::move(*table);
}

void write_embedding_table(std::ostream& out, const EmbeddingTable& table) {
    for (const auto& token : table.tokens()) {
        out << token;
        const Vector& v = *table.find(token);
        for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_real(v(i));
        out << '\n';
    }
}

// ---------------------------------------------------------------------------

Matrix read_feature_matrix(std::istream& in) {
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < 12) throw FormatError("feature file shorter than its 12-byte header");
    if (bytes.compare(0, 4, "PXY1") != 0) throw FormatError("bad magic, expected PXY1");

    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint64_t k = get_u32(p + 4);
    const std::uint64_t d = get_u32(p + 8);
    const std::uint64_t expected = 12 + k * d * 4;
    if (bytes.size() != expected)
        throw FormatError("feature file is " + std::to_string(bytes.size()) + " bytes, header implies " +
                          std::to_string(expected));

    Matrix m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    const unsigned char* q = p + 12;
    for (std::uint64_t i = 0; i < k; ++i)
        for (std::uint64_t j = 0; j < d; ++j, q += 4) {
            const float f = std::bit_cast<float>(get_u32(q));
            if (!std::isfinite(f)) throw FormatError("non-finite feature value");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f;
        }
    return m;
}

void write_feature_matrix(std::ostream& out, const Matrix& features) {
    out.write("PXY1", 4);
    put_u32(out, static_cast<std::uint32_t>(features.rows()));
    put_u32(out, static_cast<std::uint32_t>(features.cols()));
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        for (Eigen::Index j = 0; j < features.cols(); ++j)
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(features(i, j))));
}

std::vector<std::size_t> read_labels(std::istream& in, const StyleVocabulary& styles) {
    std::vector<std::size_t> labels;
    std::string line;
    std::size_t lineno = 0;
    while (getline_stripped(in, line)) {
        ++lineno;
        if (trim(line).empty()) throw FormatError("empty label", lineno);
        labels.push_back(styles.index_of(line));
    }
    return labels;
}

void write_labels(std::ostream& out, const std::vector<std::size_t>& labels, const StyleVocabulary& styles) {
    for (const auto l : labels) out << styles.name(l) << '\n';
}

FeatureDataset read_feature_dataset(std::istream& features, std::istream& labels, const StyleVocabulary& styles) {
    FeatureDataset ds;
    ds.features = read_feature_matrix(features);
    ds.labels = read_labels(labels, styles);
    ds.styles = styles;
    if (ds.labels.size() != static_cast<std::size_t>(ds.features.rows()))
        throw FormatError("labels file has " + std::to_string(ds.labels.size()) + " lines, feature file has " +
                          std::to_string(ds.features.rows()) + " rows");
    return ds;
}

void write_feature_dataset(std::ostream& features, std::ostream& labels, const FeatureDataset& data) {
    if (data.labels.size() != static_cast<std::size_t>(data.features.rows()))
        throw ShapeError("label count does not match feature rows");
    write_feature_matrix(features, data.features);
    write_labels(labels, data.labels, data.styles);
}

// ---------------------------------------------------------------------------

TernaryMatrix GroundTruthSet::binary() const {
    return (ternary.array() >= 0).cast<int>().matrix();
}

GroundTruthSet GroundTruthSet::subset(const std::vector<std::size_t>& rows) const {
    GroundTruthSet out;
    out.style_vocab = style_vocab;
    out.elements = elements;
    out.ternary.resize(static_cast<Eigen::Index>(rows.size()), ternary.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t i = rows[r];
        if (i >= ids.size()) throw IndexError("ground-truth row " + std::to_string(i) + " out of range");
        out.ids.push_back(ids[i]);
        out.styles.push_back(styles[i]);
        out.ternary.row(static_cast<Eigen::Index>(r)) = ternary.row(static_cast<Eigen::Index>(i));
    }
    return out;
}

void validate(const GroundTruthSet& gt) {
    const auto k = gt.ids.size();
    if (gt.styles.size() != k || static_cast<std::size_t>(gt.ternary.rows()) != k)
        throw DataError("ground truth: painting axis sizes disagree");
    if (static_cast<std::size_t>(gt.ternary.cols()) != gt.elements.size())
        throw DataError("ground truth: element axis does not match vocabulary");
    for (const auto s : gt.styles)
        if (s >= gt.style_vocab.size()) throw DataError("ground truth: style index out of range");
    if (k && (gt.ternary.minCoeff() < -1 || gt.ternary.maxCoeff() > 1))
        throw DataError("ground truth: entries must be -1, 0 or +1");
}

GroundTruthSet read_ground_truth_csv(std::istream& in, const StyleVocabulary* styles) {
    GroundTruthSet gt;
    gt.elements = ElementVocabulary(read_painting_header(in));
    const std::size_t m = gt.elements.size();

    std::vector<std::string> style_names;
    std::vector<int> cells;
    std::string line;
    std::size_t lineno = 1;
    while (getline_stripped(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != m + 2)
            throw FormatError("expected " + std::to_string(m + 2) + " fields, got " + std::to_string(f.size()), lineno);
        if (f[0].empty()) throw FormatError("empty painting id", lineno);
        gt.ids.emplace_back(f[0]);
        style_names.emplace_back(f[1]);
        for (std::size_t j = 0; j < m; ++j) {
            const auto v = parse_int(f[j + 2]);
            if (!v || *v < -1 || *v > 1) throw FormatError("cell must be -1, 0 or 1", lineno);
            cells.push_back(*v);
        }
    }

    if (styles) {
        gt.style_vocab = *styles;
    } else {
        std::vector<std::string> seen;
        for (const auto& s : style_names) {
            const auto n = normalize_term(s);
            if (std::find(seen.begin(), seen.end(), n) == seen.end()) seen.push_back(n);
        }
        gt.style_vocab = StyleVocabulary(std::move(seen));
    }
    for (const auto& s : style_names) gt.styles.push_back(gt.style_vocab.index_of(s));

    gt.ternary.resize(static_cast<Eigen::Index>(gt.ids.size()), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < gt.ids.size(); ++i)
        for (std::size_t j = 0; j < m; ++j)
            gt.ternary(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * m + j];
    return gt;
}

void write_ground_truth_csv(std::ostream& out, const GroundTruthSet& gt) {
    validate(gt);
    out << "painting_id,style";
    for (const auto& e : gt.elements.names()) out << ',' << e;
    out << '\n';
    for (std::size_t i = 0; i < gt.ids.size(); ++i) {
        check_name(gt.ids[i], "painting");
        out << gt.ids[i] << ',' << gt.style_vocab.name(gt.styles[i]);
        for (Eigen::Index j = 0; j < gt.ternary.cols(); ++j) out << ',' << gt.ternary(static_cast<Eigen::Index>(i), j);
        out << '\n';
    }
}

SurveySheet read_survey_csv(std::istream& in) {
    SurveySheet sheet;
    sheet.elements = ElementVocabulary(read_painting_header(in));
    const std::size_t m = sheet.elements.size();
    std::string line;
    std::size_t lineno = 1;
    while (getline_stripped(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != m + 2)
            throw FormatError("expected " + std::to_string(m + 2) + " fields, got " + std::to_string(f.size()), lineno);
        sheet.ids.emplace_back(f[0]);
        sheet.style_names.emplace_back(f[1]);
        for (std::size_t j = 0; j < m; ++j) {
            const std::string cell = normalize_term(f[j + 2]);
            if (cell == "relevant" || cell == "1" || cell == "+1")
                sheet.answers.push_back(Answer::relevant);
            else if (cell == "somewhat" || cell == "0")
                sheet.answers.push_back(Answer::somewhat);
            else if (cell == "irrelevant" || cell == "-1")
                sheet.answers.push_back(Answer::irrelevant);
            else
                throw FormatError("unknown survey answer \"" + cell + "\"", lineno);
        }
    }
    return sheet;
}

Answer majority_answer(Answer a, Answer b, Answer c) {
    if (a == b || a == c) return a;
    if (b == c) return b;
    return Answer::somewhat;
}

int ternary_value(Answer a) {
    switch (a) {
        case Answer::relevant: return 1;
        case Answer::somewhat: return 0;
        case Answer::irrelevant: return -1;
    }
    return 0;
}

GroundTruthSet ingest_survey(const std::array<SurveySheet, 3>& sheets, const StyleVocabulary* styles) {
    const SurveySheet& first = sheets[0];
    const std::size_t k = first.ids.size();
    const std::size_t m = first.elements.size();
    for (const auto& s : sheets) {
        if (s.ids != first.ids || s.style_names.size() != k) throw ShapeError("survey sheets cover different paintings");
        if (!(s.elements == first.elements)) throw ShapeError("survey sheets cover different elements");
        if (s.answers.size() != k * m) throw ShapeError("survey sheet answer count does not match its axes");
    }

    GroundTruthSet gt;
    gt.ids = first.ids;
    gt.elements = first.elements;
    if (styles) {
        gt.style_vocab = *styles;
    } else {
        std::vector<std::string> seen;
        for (const auto& s : first.style_names) {
            const auto n = normalize_term(s);
            if (std::find(seen.begin(), seen.end(), n) == seen.end()) seen.push_back(n);
        }
        gt.style_vocab = StyleVocabulary(std::move(seen));
    }
    for (const auto& s : first.style_names) gt.styles.push_back(gt.style_vocab.index_of(s));

    gt.ternary.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < m; ++j)
            gt.ternary(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                ternary_value(majority_answer(sheets[0].at(i, j), sheets[1].at(i, j), sheets[2].at(i, j)));
    return gt;
}

// ---------------------------------------------------------------------------

void validate(const CategoryAttributeMatrix& g) {
    if (static_cast<std::size_t>(g.g.rows()) != g.elements.size() ||
        static_cast<std::size_t>(g.g.cols()) != g.styles.size())
        throw ShapeError("G is " + std::to_string(g.g.rows()) + "x" + std::to_string(g.g.cols()) +
                         " but vocabularies are " + std::to_string(g.elements.size()) + "x" +
                         std::to_string(g.styles.size()));
    require_finite(g.g, "G");
}

CategoryAttributeMatrix read_g_csv(std::istream& in) {
    std::string line;
    if (!getline_stripped(in, line)) throw FormatError("missing header", 1);
    const auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "element")
        throw FormatError("header must be element,<style1>,...,<styleN> with at least two styles", 1);
    std::vector<std::string> style_names(header.begin() + 1, header.end());
    for (const auto& s : style_names)
        if (s.empty()) throw FormatError("empty style name in header", 1);
    const std::size_t n = style_names.size();

    std::vector<std::string> element_names;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (getline_stripped(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != n + 1)
            throw FormatError("expected " + std::to_string(n + 1) + " fields, got " + std::to_string(f.size()), lineno);
        if (f[0].empty()) throw FormatError("empty element name", lineno);
        element_names.emplace_back(f[0]);
        for (std::size_t j = 1; j <= n; ++j) {
            const auto v = parse_real(f[j]);
            if (!v || !std::isfinite(*v)) throw FormatError("bad number \"" + std::string(f[j]) + "\"", lineno);
            values.push_back(*v);
        }
    }

    CategoryAttributeMatrix g;
    try {
        g.elements = ElementVocabulary(std::move(element_names));
        g.styles = StyleVocabulary(std::move(style_names));
    } catch (const DataError& e) {
        throw FormatError(e.what());
    }
    const std::size_t m = g.elements.size();
    g.g.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g.g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * n + j];
    return g;
}

void write_g_csv(std::ostream& out, const CategoryAttributeMatrix& g) {
    validate(g);
    out << "element";
    for (const auto& s : g.styles.names()) out << ',' << s;
    out << '\n';
    for (std::size_t i = 0; i < g.rows(); ++i) {
        out << g.elements.name(i);
        for (std::size_t j = 0; j < g.cols(); ++j)
            out << ',' << format_real(g.g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out << '\n';
    }
}

ScoreTable read_score_csv(std::istream& in) {
    std::string line;
    if (!getline_stripped(in, line)) throw FormatError("missing header", 1);
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "id") throw FormatError("header must be id,<column1>,...", 1);
    ScoreTable t;
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw FormatError("empty column name in header", 1);
        t.columns.emplace_back(header[j]);
    }
    const std::size_t c = t.columns.size();
    std::vector<double> values;
    std::size_t lineno = 1;
    while (getline_stripped(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != c + 1)
            throw FormatError("expected " + std::to_string(c + 1) + " fields, got " + std::to_string(f.size()), lineno);
        t.ids.emplace_back(f[0]);
        for (std::size_t j = 1; j <= c; ++j) {
            const auto v = parse_real(f[j]);
            if (!v || !std::isfinite(*v)) throw FormatError("bad number \"" + std::string(f[j]) + "\"", lineno);
            values.push_back(*v);
        }
    }
    t.values.resize(static_cast<Eigen::Index>(t.ids.size()), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < t.ids.size(); ++i)
        for (std::size_t j = 0; j < c; ++j) t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * c + j];
    return t;
}

void write_score_csv(std::ostream& out, const ScoreTable& table) {
    if (table.values.rows() != static_cast<Eigen::Index>(table.ids.size()) ||
        table.values.cols() != static_cast<Eigen::Index>(table.columns.size()))
        throw ShapeError("score table axes do not match its values");
    out << "id";
    for (const auto& c : table.columns) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        out << table.ids[i];
        for (Eigen::Index j = 0; j < table.values.cols(); ++j)
            out << ',' << format_real(table.values(static_cast<Eigen::Index>(i), j));
        out << '\n';
    }
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::logic_error("format_real: buffer too small");
    return std::string(buf, ptr);
}

}  // namespace pxy
