#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qframe {

/// Base class of every error raised by the library. The CLI maps these to
/// exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed state text; `position` is the 0-based offending character.
class ParseError : public Error {
public:
    ParseError(const std::string& text, std::size_t position, const std::string& why)
        : Error("parse error at position " + std::to_string(position) + " in \"" + text +
                "\": " + why),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition (e.g. passed an unnormalized state).
class ContractViolation : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ResourceError : public Error {
public:
    ResourceError(const std::string& what, std::size_t cap)
        : Error(what + " (support cap " + std::to_string(cap) + ")"), cap_(cap) {}

    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t cap_;
};

/// Two independently computed routes disagreed.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

class PathError : public Error {
public:
    using Error::Error;
};

class VisibilityError : public Error {
public:
    using Error::Error;
};

class DecodeError : public Error {
public:
    explicit DecodeError(std::vector<std::size_t> pairs)
        : Error(message(pairs)), pairs_(std::move(pairs)) {}

    const std::vector<std::size_t>& pairs() const noexcept { return pairs_; }

private:
    static std::string message(const std::vector<std::size_t>& pairs) {
        std::string m = "undecidable logical pair(s):";
        for (auto p : pairs) m += " " + std::to_string(p);
        return m;
    }

    std::vector<std::size_t> pairs_;
};

}  // namespace qframe
