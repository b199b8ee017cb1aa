#pragma once

#include <stdexcept>
#include <string>

namespace sis {

// Raised when a request exceeds what an implementation can feasibly
// compute (e.g. dense solvers asked for a population far past their
// size guard). The message names the bound.
struct CapabilityError : std::runtime_error {
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sis
