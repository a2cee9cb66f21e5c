#pragma once

#include <stdexcept>
#include <string>

namespace ddhinf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidMatrix : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct SingularBlock : Error {
    using Error::Error;
};
struct MalformedTrajectory : Error {
    using Error::Error;
};
struct WindowUnderflow : Error {
    using Error::Error;
};
struct DegenerateSet : Error {
    using Error::Error;
};
struct Unbounded : Error {
    using Error::Error;
};
struct NumericalFailure : Error {
    using Error::Error;
};
struct InvalidCertificate : Error {
    using Error::Error;
};
struct InfeasibleSeed : Error {
    using Error::Error;
};
struct ContractViolation : Error {
    using Error::Error;
};
struct SynthesisInfeasible : Error {
    using Error::Error;
};
struct UndefinedRatio : Error {
    using Error::Error;
};

}  // namespace ddhinf
