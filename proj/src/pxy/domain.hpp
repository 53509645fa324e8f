#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pxy/linalg.hpp"

namespace pxy {

/// Canonical term form: ASCII-lowercased, trimmed, with runs of spaces or
/// underscores collapsed to a single hyphen ("Color Field_Painting" -> "color-field-painting").
std::string normalize_term(std::string_view term);

/// Ordered list of unique, normalised names.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> names, std::size_t min_size, const char* kind);

    std::size_t size() const noexcept { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    std::optional<std::size_t> find(std::string_view term) const;
    /// Index of `term`, or VocabularyError naming it.
    std::size_t index_of(std::string_view term) const;

    bool operator==(const Vocabulary& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct ElementVocabulary : Vocabulary {
    ElementVocabulary() = default;
    explicit ElementVocabulary(std::vector<std::string> names) : Vocabulary(std::move(names), 1, "element") {}
    /// The 58 visual elements and principles of art.
    static ElementVocabulary art_elements();
};

struct StyleVocabulary : Vocabulary {
    StyleVocabulary() = default;
    explicit StyleVocabulary(std::vector<std::string> names) : Vocabulary(std::move(names), 2, "style") {}
    /// The 20 merged WikiArt styles.
    static StyleVocabulary wikiart_styles();
};

/// Reads one name per line; blank lines are skipped.
std::vector<std::string> read_name_list(std::istream& in);

// ---------------------------------------------------------------------------
// Word embeddings

class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dimension = 0) : dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    /// Adds a vector under the normalised token; FormatError on duplicates or wrong dimension.
    void add(std::string_view token, Vector v);
    const Vector* find(std::string_view token) const;

private:
    std::size_t dimension_;
    std::vector<std::string> tokens_;
    std::vector<Vector> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Parses `token v1 ... vd` records (whitespace separated, one per line).
EmbeddingTable parse_embedding_table(std::istream& in);
void write_embedding_table(std::ostream& out, const EmbeddingTable& table);

// ---------------------------------------------------------------------------
// Features

struct FeatureDataset {
    Matrix features;                  // k x d
    std::vector<std::size_t> labels;  // k style indices
    StyleVocabulary styles;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

/// PXY1 feature file: "PXY1", u32 k, u32 d (little-endian), then k*d float32 LE row-major.
Matrix read_feature_matrix(std::istream& in);
void write_feature_matrix(std::ostream& out, const Matrix& features);

std::vector<std::size_t> read_labels(std::istream& in, const StyleVocabulary& styles);
void write_labels(std::ostream& out, const std::vector<std::size_t>& labels, const StyleVocabulary& styles);

FeatureDataset read_feature_dataset(std::istream& features, std::istream& labels, const StyleVocabulary& styles);
void write_feature_dataset(std::ostream& features, std::ostream& labels, const FeatureDataset& data);

// ---------------------------------------------------------------------------
// Ground truth

using TernaryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

struct GroundTruthSet {
    std::vector<std::string> ids;
    std::vector<std::size_t> styles;  // per painting, index into style_vocab
    StyleVocabulary style_vocab;
    ElementVocabulary elements;
    TernaryMatrix ternary;  // k x m, entries in {-1, 0, +1}

    std::size_t size() const noexcept { return ids.size(); }
    /// Binary relevance: +1 and 0 ("somewhat") count as relevant.
    TernaryMatrix binary() const;
    /// Rows `rows` in the given order.
    GroundTruthSet subset(const std::vector<std::size_t>& rows) const;
};

/// Checks the ternary invariant and axis sizes; throws DataError.
void validate(const GroundTruthSet& gt);

/// Ground-truth CSV: `painting_id,style,<element1>,...` with cells in {-1,0,1}.
/// When `styles` is given, style names must belong to it; otherwise the style
/// vocabulary is built in order of first appearance.
GroundTruthSet read_ground_truth_csv(std::istream& in, const StyleVocabulary* styles = nullptr);
void write_ground_truth_csv(std::ostream& out, const GroundTruthSet& gt);

enum class Answer : std::uint8_t { relevant, somewhat, irrelevant };

/// One annotator's answers for every (painting, element) cell.
struct SurveySheet {
    std::vector<std::string> ids;
    std::vector<std::string> style_names;
    ElementVocabulary elements;
    std::vector<Answer> answers;  // k x m row-major

    Answer at(std::size_t painting, std::size_t element) const {
        return answers[painting * elements.size() + element];
    }
};

/// Survey CSV with the ground-truth header; cells are relevant/somewhat/irrelevant (or 1/0/-1).
SurveySheet read_survey_csv(std::istream& in);

/// Majority of three answers; three different answers resolve to `somewhat`.
Answer majority_answer(Answer a, Answer b, Answer c);
int ternary_value(Answer a);

GroundTruthSet ingest_survey(const std::array<SurveySheet, 3>& sheets, const StyleVocabulary* styles = nullptr);

// ---------------------------------------------------------------------------
// Category-attribute matrix

enum class Provenance { unspecified, embedding, ground_truth, synthetic };

struct CategoryAttributeMatrix {
    Matrix g;  // m x n
    ElementVocabulary elements;
    StyleVocabulary styles;
    Provenance provenance = Provenance::unspecified;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(g.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(g.cols()); }
};

void validate(const CategoryAttributeMatrix& g);

/// G CSV: `element,<style1>,...,<styleN>` then one row per element.
CategoryAttributeMatrix read_g_csv(std::istream& in);
void write_g_csv(std::ostream& out, const CategoryAttributeMatrix& g);

// ---------------------------------------------------------------------------
// Score tables

/// Row-labelled real matrix: CSV `id,<column1>,...`.
struct ScoreTable {
    std::vector<std::string> ids;
    std::vector<std::string> columns;
    Matrix values;
};

ScoreTable read_score_csv(std::istream& in);
void write_score_csv(std::ostream& out, const ScoreTable& table);

/// Shortest decimal form that round-trips to the same double.
std::string format_real(double v);

}  // namespace pxy
