#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace palign {

// Computation failure with a stable machine-readable code, e.g. "SingularSystem",
// "EmptyRegion", "DegenerateMean", "RegionTooSmall".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Filesystem or codec failure. The CLI maps this to exit code 2.
class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("Io", message) {}
};

}  // namespace palign
