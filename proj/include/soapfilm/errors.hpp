#pragma once

#include <stdexcept>
#include <string>

namespace soapfilm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadSceneError : Error {
    using Error::Error;
};
struct EmptyOmegaError : Error {
    using Error::Error;
};
struct NonInteriorFacetError : Error {
    using Error::Error;
};
struct TubeSelfOverlapError : Error {
    using Error::Error;
};
struct TubeTouchesWireError : Error {
    using Error::Error;
};
struct VolumeInfeasibleError : Error {
    using Error::Error;
};
struct NoInitialSpanningError : Error {
    using Error::Error;
};
struct NoJunctionError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace soapfilm
