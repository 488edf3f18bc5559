#pragma once

#include <stdexcept>
#include <string>

namespace droplab {

/// Base of every error raised by the library. `kind()` is the stable,
/// machine-readable tag written into error JSON by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define DROPLAB_ERROR_KIND(Name, tag)                                    \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(tag, what) {}     \
    };

DROPLAB_ERROR_KIND(ConfigurationError, "configuration")
DROPLAB_ERROR_KIND(PreconditionError, "precondition")
DROPLAB_ERROR_KIND(IoError, "io")
DROPLAB_ERROR_KIND(NumericalError, "numerical")
DROPLAB_ERROR_KIND(GrowthError, "growth")
DROPLAB_ERROR_KIND(BoxTooSmallError, "box_too_small")
DROPLAB_ERROR_KIND(InconsistencyError, "inconsistency")
DROPLAB_ERROR_KIND(DegenerateError, "degenerate")
DROPLAB_ERROR_KIND(ResolutionError, "resolution")

#undef DROPLAB_ERROR_KIND

}  // namespace droplab
