#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

// Runtime numerical failure (iteration breakdown, non-convergence, singular pivot).
// Distinct from std::domain_error, which flags invalid arguments.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fraclap
