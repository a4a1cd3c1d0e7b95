#pragma once

#include <stdexcept>
#include <string>

namespace dforge {

// Base for all library errors. `kind()` is a stable machine-readable tag;
// the CLI maps kinds onto exit codes.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define DFORGE_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& message)                   \
            : Error(#Name, message) {}                              \
    }

DFORGE_DEFINE_ERROR(EmptyScene);
DFORGE_DEFINE_ERROR(DegenerateFrame);
DFORGE_DEFINE_ERROR(InvalidSpec);
DFORGE_DEFINE_ERROR(DegenerateOrbit);
DFORGE_DEFINE_ERROR(IdenticalPoses);
DFORGE_DEFINE_ERROR(GridMismatch);
DFORGE_DEFINE_ERROR(EmptyVolume);
DFORGE_DEFINE_ERROR(ShapeMismatch);
DFORGE_DEFINE_ERROR(EmptySequence);
DFORGE_DEFINE_ERROR(InvalidRange);
DFORGE_DEFINE_ERROR(InvalidTimestep);
DFORGE_DEFINE_ERROR(LengthMismatch);
DFORGE_DEFINE_ERROR(ImageTooSmall);
DFORGE_DEFINE_ERROR(ParseError);
DFORGE_DEFINE_ERROR(IoError);

#undef DFORGE_DEFINE_ERROR

} // namespace dforge
