#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pxy {

enum class ErrorCode {
    invalid_matrix,
    shape,
    degenerate_input,
    format,
    vocabulary,
    data,
    rank,
    singular,
    training_diverged,
    index,
    invalid_config,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct InvalidMatrix : Error {
    explicit InvalidMatrix(const std::string& w) : Error(ErrorCode::invalid_matrix, w) {}
};
struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorCode::shape, w) {}
};
struct DegenerateInput : Error {
    explicit DegenerateInput(const std::string& w) : Error(ErrorCode::degenerate_input, w) {}
};
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(ErrorCode::data, w) {}
};
struct RankError : Error {
    explicit RankError(const std::string& w) : Error(ErrorCode::rank, w) {}
};
struct SingularError : Error {
    explicit SingularError(const std::string& w) : Error(ErrorCode::singular, w) {}
};
struct IndexError : Error {
    explicit IndexError(const std::string& w) : Error(ErrorCode::index, w) {}
};
struct InvalidConfig : Error {
    explicit InvalidConfig(const std::string& w) : Error(ErrorCode::invalid_config, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorCode::io, w) {}
};

/// Malformed input. `line()` is 1-based, or 0 when the failure is not tied to a line.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& w, std::size_t line = 0)
        : Error(ErrorCode::format, line ? w + " (line " + std::to_string(line) + ")" : w), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// One or more terms were not found in a vocabulary or embedding table.
class VocabularyError : public Error {
public:
    explicit VocabularyError(std::vector<std::string> terms)
        : Error(ErrorCode::vocabulary, describe(terms)), terms_(std::move(terms)) {}
    const std::vector<std::string>& terms() const noexcept { return terms_; }

private:
    static std::string describe(const std::vector<std::string>& terms) {
        std::string s = "unknown term(s):";
        for (const auto& t : terms) s += " \"" + t + "\"";
        return s;
    }
    std::vector<std::string> terms_;
};

class TrainingDiverged : public Error {
public:
    explicit TrainingDiverged(std::size_t step)
        : Error(ErrorCode::training_diverged, "training diverged: non-finite loss at step " + std::to_string(step)),
          step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace pxy
