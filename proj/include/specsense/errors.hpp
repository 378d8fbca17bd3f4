#pragma once

#include <stdexcept>
#include <string>

namespace specsense {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller-supplied argument violates a documented precondition.
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& what) : Error(what) {}
};

/// Generic file-system failure (cannot open / cannot write).
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

/// An IQ file contained zero samples.
class EmptyRecordingError : public IoError {
public:
    explicit EmptyRecordingError(const std::string& what) : IoError(what) {}
};

/// An IQ file ends mid-sample (size not a multiple of one complex sample).
class TruncatedSampleError : public IoError {
public:
    explicit TruncatedSampleError(const std::string& what) : IoError(what) {}
};

/// An IQ file holds NaN or infinite sample values.
class NonFiniteSampleError : public IoError {
public:
    explicit NonFiniteSampleError(const std::string& what) : IoError(what) {}
};

/// A metadata sidecar file could not be parsed.
class MetadataParseError : public IoError {
public:
    explicit MetadataParseError(const std::string& what) : IoError(what) {}
};

/// An exhaustive computation was requested beyond its hard size limit.
class BruteForceBoundError : public InvalidInputError {
public:
    explicit BruteForceBoundError(const std::string& what) : InvalidInputError(what) {}
};

}  // namespace specsense
