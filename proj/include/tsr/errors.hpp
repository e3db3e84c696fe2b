#pragma once

#include <stdexcept>
#include <string>

namespace tsr {

// Base class for everything thrown by the library. Subclasses exist so
// callers can distinguish data problems from usage problems.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data problems (bad files, bad datasets).
class DataError : public Error {
public:
    using Error::Error;
};

// Contract violations (bad arguments, incompatible objects).
class UsageError : public Error {
public:
    using Error::Error;
};

class UnsupportedFormat : public DataError { public: using DataError::DataError; };
class CorruptFile       : public DataError { public: using DataError::DataError; };
class EmptyShape        : public DataError { public: using DataError::DataError; };
class EmptyDirectory    : public DataError { public: using DataError::DataError; };
class VersionMismatch   : public DataError { public: using DataError::DataError; };
class ChecksumFailure   : public DataError { public: using DataError::DataError; };
class DegenerateShape   : public DataError { public: using DataError::DataError; };
class TooFewContourPixels : public DataError { public: using DataError::DataError; };
class DisconnectedInterior : public DataError { public: using DataError::DataError; };

class DimensionMismatch : public UsageError { public: using UsageError::UsageError; };
class InvalidM          : public UsageError { public: using UsageError::UsageError; };
class EigenFailure      : public Error      { public: using Error::Error; };
class SingleClassTraining : public UsageError { public: using UsageError::UsageError; };
class NonFiniteFeature  : public DataError  { public: using DataError::DataError; };
class EmptyGallery      : public UsageError { public: using UsageError::UsageError; };
class IncompatibleIndex : public UsageError { public: using UsageError::UsageError; };
class RankingTooShort   : public UsageError { public: using UsageError::UsageError; };

} // namespace tsr
