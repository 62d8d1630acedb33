#pragma once

#include <stdexcept>
#include <string>

namespace reqsolve {

/// Base class of every error raised by the engine. `kind()` is the stable
/// identifier written into reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define REQSOLVE_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    }

// versioning
REQSOLVE_DEFINE_ERROR(MalformedVersion);
REQSOLVE_DEFINE_ERROR(MalformedSpecifier);
REQSOLVE_DEFINE_ERROR(MalformedRequirement);
REQSOLVE_DEFINE_ERROR(DuplicatePackage);

// knowledge
REQSOLVE_DEFINE_ERROR(IndexUnavailable);
REQSOLVE_DEFINE_ERROR(UnknownPackage);
REQSOLVE_DEFINE_ERROR(MetadataMissing);
REQSOLVE_DEFINE_ERROR(SourceUnavailable);
REQSOLVE_DEFINE_ERROR(ParseFailure);

// solver
REQSOLVE_DEFINE_ERROR(TargetVersionUnknown);
REQSOLVE_DEFINE_ERROR(UnsatisfiablePin);

// strategy
REQSOLVE_DEFINE_ERROR(NoPlan);

// cli
REQSOLVE_DEFINE_ERROR(ConfigInvalid);
REQSOLVE_DEFINE_ERROR(PinMismatch);

#undef REQSOLVE_DEFINE_ERROR

}  // namespace reqsolve
