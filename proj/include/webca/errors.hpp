#pragma once

#include <stdexcept>
#include <string>

namespace webca {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateGeometry : Error {
    using Error::Error;
};
struct BadWindowLength : Error {
    using Error::Error;
};
struct SpecMismatch : Error {
    using Error::Error;
};
struct UnknownWaveletFamily : Error {
    using Error::Error;
};
struct UnknownScheme : Error {
    using Error::Error;
};
struct ConfigMismatch : Error {
    using Error::Error;
};
struct NotCLS : Error {
    using Error::Error;
};
struct TickMismatch : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};
struct Untrained : Error {
    using Error::Error;
};
struct MissingPolicy : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace webca
