#pragma once

#include <stdexcept>
#include <string>

namespace curvlab {

// Base of every error the library throws. `kind()` is a stable short tag
// used by the CLI when it reports failures.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct PositiveCurvatureError : Error {
    explicit PositiveCurvatureError(const std::string& w) : Error("positive-curvature", w) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error("domain", w) {}
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& w) : Error("invalid-argument", w) {}
};

struct IntegrationError : Error {
    IntegrationError(const std::string& w, double where)
        : Error("integration", w), location(where) {}
    double location;
};

struct NonpositivityViolation : Error {
    explicit NonpositivityViolation(const std::string& w) : Error("nonpositivity-violation", w) {}
};

struct BracketError : Error {
    explicit BracketError(const std::string& w) : Error("bracket", w) {}
};

struct DiscrepancyError : Error {
    explicit DiscrepancyError(const std::string& w) : Error("discrepancy", w) {}
};

struct CapExceeded : Error {
    explicit CapExceeded(const std::string& w) : Error("cap-exceeded", w) {}
};

struct SchemaError : Error {
    SchemaError(std::string path_, const std::string& w)
        : Error("schema", path_ + ": " + w), path(std::move(path_)) {}
    std::string path;
};

}  // namespace curvlab
