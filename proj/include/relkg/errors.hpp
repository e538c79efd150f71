#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace relkg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A CREATE TABLE statement in a dump could not be parsed.
class DumpSyntaxError : public Error {
public:
    DumpSyntaxError(std::size_t offset, const std::string& message)
        : Error("dump syntax error at offset " + std::to_string(offset) + ": " + message),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class ManifestMismatch : public Error {
public:
    using Error::Error;
};

class InvalidDomainName : public Error {
public:
    using Error::Error;
};

class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

class ClassificationMismatch : public Error {
public:
    using Error::Error;
};

class UnknownSchemaItem : public Error {
public:
    explicit UnknownSchemaItem(std::string item)
        : Error("unknown schema item: " + item), item_(std::move(item)) {}
    const std::string& item() const noexcept { return item_; }

private:
    std::string item_;
};

class UntranslatableQuery : public Error {
public:
    using Error::Error;
};

class ExecError : public Error {
public:
    using Error::Error;
};

class EmptyWorkload : public Error {
public:
    EmptyWorkload() : Error("workload has no executed queries") {}
};

class WorkloadFormatError : public Error {
public:
    using Error::Error;
};

class GraphFormatError : public Error {
public:
    using Error::Error;
};

/// Parse failure of the SQL (or Cypher) frontends. Carries the byte offset
/// and the set of tokens that would have been accepted there.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message)
        : Error(format(offset, expected, message)),
          offset_(offset),
          expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string format(std::size_t offset, const std::vector<std::string>& expected,
                              const std::string& message) {
        std::string out = "parse error at offset " + std::to_string(offset) + ": " + message;
        if (!expected.empty()) {
            out += " (expected ";
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (i) out += ", ";
                out += expected[i];
            }
            out += ")";
        }
        return out;
    }

    std::size_t offset_;
    std::vector<std::string> expected_;
};

}  // namespace relkg
