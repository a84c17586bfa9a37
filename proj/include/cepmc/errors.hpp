#pragma once

#include <stdexcept>
#include <string>

namespace cepmc {

// Covariance failed the lower-triangular factorization or the pivot guard.
class NotPositiveDefinite : public std::runtime_error {
public:
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

// No positive weight mass where at least one was required.
class AllWeightsZero : public std::runtime_error {
public:
    explicit AllWeightsZero(const std::string& what) : std::runtime_error(what) {}
};

class NonFiniteWeight : public std::runtime_error {
public:
    explicit NonFiniteWeight(const std::string& what) : std::runtime_error(what) {}
};

class EmptyBatch : public std::runtime_error {
public:
    explicit EmptyBatch(const std::string& what) : std::runtime_error(what) {}
};

class NoConvergence : public std::runtime_error {
public:
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cepmc
