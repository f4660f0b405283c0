#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace lppl {

/// Evaluation outside the LPPL domain, i.e. T - x below the boundary gap.
/// Carries the 1-based sample index when the failure came from a series.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::domain_error(what), index_(index) {}

    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    std::optional<std::size_t> index_;
};

/// Invalid user-supplied data or parameters (bad weights, malformed CSV, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace lppl
