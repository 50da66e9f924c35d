#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace infolab {

// Every library error derives from Error so callers can catch the family.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidDistribution : Error { using Error::Error; };
struct SupportViolation : Error { using Error::Error; };
struct InvalidTarget : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };

struct MissingParameter : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct EmptyGrid : Error { using Error::Error; };

struct ExternalExpertFailure : Error { using Error::Error; };

struct ParseError : Error {
    ParseError(const std::string& what, int line, std::string field)
        : Error(what), line(line), field(std::move(field)) {}
    int line;  // 1-based, 0 when unknown
    std::string field;
};

struct ValidationError : Error {
    explicit ValidationError(std::vector<std::string> problems)
        : Error(join(problems)), problems(std::move(problems)) {}
    std::vector<std::string> problems;

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "invalid configuration:";
        for (const auto& item : items) out += "\n  - " + item;
        return out;
    }
};

}  // namespace infolab
