#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcrg {

// Base of every domain error raised by the library. The CLI maps these to
// exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io error: " + what) {}
};

class MalformedDiff : public Error {
public:
    MalformedDiff(std::size_t line_no, const std::string& reason)
        : Error("malformed diff at line " + std::to_string(line_no) + ": " + reason),
          line_no(line_no), reason(reason) {}
    std::size_t line_no;
    std::string reason;
};

class HunkMismatch : public Error {
public:
    HunkMismatch(std::size_t hunk_index, const std::string& detail)
        : Error("hunk " + std::to_string(hunk_index) + " does not apply: " + detail),
          hunk_index(hunk_index) {}
    std::size_t hunk_index;
};

class SchemaError : public Error {
public:
    SchemaError(std::string record, std::string field, std::string reason)
        : Error("schema error in " + record + ", field '" + field + "': " + reason),
          record(std::move(record)), field(std::move(field)), reason(std::move(reason)) {}
    std::string record;
    std::string field;
    std::string reason;
};

class UnknownRevision : public Error {
public:
    using Error::Error;
};

class RevisionMismatch : public Error {
public:
    using Error::Error;
};

class SyntaxError : public Error {
public:
    SyntaxError(int line, int col, std::string expected, std::string found)
        : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(col) +
                ": expected " + expected + ", found " + found),
          line(line), col(col), expected(std::move(expected)), found(std::move(found)) {}
    int line;
    int col;
    std::string expected;
    std::string found;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class EmptyMask : public Error {
public:
    EmptyMask() : Error("no labeled entries after masking") {}
};

class GraphDetached : public Error {
public:
    GraphDetached() : Error("tensor has no recorded lineage to differentiate") {}
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class SingleClassAuc : public Error {
public:
    SingleClassAuc() : Error("ROC-AUC is undefined when only one class is present") {}
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ConfigMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace mcrg
