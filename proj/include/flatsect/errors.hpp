#pragma once

#include <stdexcept>
#include <string>

namespace flatsect {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Base for geometric failures reported by the subspace kernels.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The flats are parallel: the joint membership system has no solution.
class EmptyIntersection : public GeometryError {
public:
    using GeometryError::GeometryError;
};

/// The intersection exists but its dimension differs from the generic one.
class DegenerateConfiguration : public GeometryError {
public:
    using GeometryError::GeometryError;
};

/// Monte Carlo harness failure (degeneracy budget exceeded, refused request).
class HarnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace flatsect
