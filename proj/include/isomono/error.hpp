#pragma once

#include <stdexcept>
#include <string>

namespace isomono {

// Caller supplied something outside an operation's domain.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A computation could not be completed (step underflow, non-finite state,
// near-collision of marked points).
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, std::string where = {})
        : std::runtime_error(where.empty() ? what : what + " [" + where + "]"),
          where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace isomono
