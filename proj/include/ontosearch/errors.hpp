#ifndef ONTOSEARCH_ERRORS_HPP
#define ONTOSEARCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ontosearch {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Input file exists but does not conform to its schema.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// A domain contract was violated (unknown concept, isolated node,
/// empty component, shape mismatch, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

} // namespace ontosearch

#endif
