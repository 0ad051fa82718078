#pragma once

#include <stdexcept>
#include <string>

namespace lpd {

// Base for every error thrown by the toolkit. Subclasses let callers (and the
// CLI exit-code mapping) distinguish the failure class without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace lpd
