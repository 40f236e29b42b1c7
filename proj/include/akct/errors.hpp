#pragma once

#include <stdexcept>
#include <string>

namespace akct {

// Base type for all validation and runtime failures raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonAscendingBreakpoints : Error { using Error::Error; };
struct NegativeHeight : Error { using Error::Error; };

struct MassNotOne : Error {
    explicit MassNotOne(double integral_, const std::string& what_)
        : Error(what_), integral(integral_) {}
    double integral;
};

struct DegenerateSupport : Error { using Error::Error; };
struct SupportMismatch : Error { using Error::Error; };
struct PartitionOutOfRange : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct UnsortedInput : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct GenerationTimeout : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace akct
