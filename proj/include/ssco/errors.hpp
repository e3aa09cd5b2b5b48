#pragma once
#include <stdexcept>
#include <string>

namespace ssco {

struct InvalidInstanceError : std::runtime_error {
    explicit InvalidInstanceError(const std::string& what) : std::runtime_error(what) {}
};

struct MaskedActionError : std::runtime_error {
    explicit MaskedActionError(const std::string& what) : std::runtime_error(what) {}
};

struct BudgetExhaustedError : std::runtime_error {
    explicit BudgetExhaustedError(const std::string& what) : std::runtime_error(what) {}
};

struct IntractableInstanceError : std::runtime_error {
    explicit IntractableInstanceError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ssco
