#pragma once

#include <stdexcept>
#include <string>

namespace bomber {

// Argument outside the domain of a function (e.g. a negative resource).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Vectors or fields that should share a grid do not.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Caller passed something the operation is not defined for (bad config,
// wrong field scaling, malformed grid or ammo string).
class UsageError : public std::invalid_argument {
public:
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// An invariant that holds for a correct operator was observed to fail.
class ConsistencyError : public std::logic_error {
public:
    explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace bomber
