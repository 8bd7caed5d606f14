#pragma once

#include <stdexcept>
#include <string>

namespace vcsim {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// topology
struct NoPathError : SimError {
    using SimError::SimError;
};
struct NotOwnerError : SimError {
    using SimError::SimError;
};
struct NotGrantedError : SimError {
    using SimError::SimError;
};
struct AlreadyAttachedError : SimError {
    using SimError::SimError;
};

// cache
struct ObjectTooLargeError : SimError {
    using SimError::SimError;
};
struct NotCacheableError : SimError {
    using SimError::SimError;
};
struct TimeRegressionError : SimError {
    using SimError::SimError;
};

// peering
struct SameTenantError : SimError {
    using SimError::SimError;
};
struct EvictedSinceHitError : SimError {
    using SimError::SimError;
};

// scenario / cli
struct ConfigError : SimError {
    ConfigError(std::string fieldPath, const std::string& message)
        : SimError(fieldPath + ": " + message), field(std::move(fieldPath)) {}
    std::string field;
};
struct NoPeeringDefinedError : SimError {
    using SimError::SimError;
};
struct ParseError : SimError {
    using SimError::SimError;
};

}  // namespace vcsim
