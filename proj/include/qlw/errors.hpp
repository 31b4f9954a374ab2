#ifndef QLW_ERRORS_HPP
#define QLW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qlw {

// Invalid inputs: bad indices, malformed configs, violated preconditions.
// The CLI maps this to exit code 1.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Quadrature or solver produced non-finite values, singular systems, etc.
// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace qlw

#endif
