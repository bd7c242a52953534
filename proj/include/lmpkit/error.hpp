#pragma once

#include <stdexcept>
#include <string>

namespace lmpkit {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// invalid input / validation / spec -> 1, I/O and format -> 2, anything else -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInputError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct SpecError : Error {
    using Error::Error;
};
struct GeometryError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace lmpkit
