#ifndef AAROC_ERRORS_HPP
#define AAROC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aaroc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankDeficient : Error {
    using Error::Error;
};
struct EmptyCandidateSet : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct GridMismatch : Error {
    using Error::Error;
};
struct Diverged : Error {
    using Error::Error;
};
struct PicardNotConverged : Error {
    PicardNotConverged(const std::string& msg, long step, int iterations)
        : Error(msg), step(step), iterations(iterations) {}
    long step;
    int iterations;
};
struct InvalidPartition : Error {
    using Error::Error;
};
struct MissingTimeIndex : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct ZeroReference : Error {
    using Error::Error;
};
struct AllTimesSampled : Error {
    using Error::Error;
};
struct SingularGeimSystem : Error {
    using Error::Error;
};
struct SingularEimSystem : Error {
    using Error::Error;
};
struct DegenerateResidual : Error {
    using Error::Error;
};
struct FomFailure : Error {
    using Error::Error;
};
struct BudgetExhausted : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct ArtifactVersionMismatch : Error {
    using Error::Error;
};
struct InvalidDomain : Error {
    using Error::Error;
};

} // namespace aaroc

#endif
