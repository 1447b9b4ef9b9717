#pragma once

#include <stdexcept>
#include <string>

namespace mtc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problems with input data: malformed files, unknown labels, bad shapes.
/// The CLI maps these to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// An external model plugin failed. The CLI maps these to exit code 3.
class PluginError : public Error {
public:
    using Error::Error;
};

#define MTC_DATA_ERROR(Name)                  \
    class Name : public DataError {           \
    public:                                   \
        using DataError::DataError;           \
    }

// capture
MTC_DATA_ERROR(UnreadableFile);
// dataset
MTC_DATA_ERROR(MissingFile);
MTC_DATA_ERROR(DuplicatePath);
MTC_DATA_ERROR(InvalidManifest);
MTC_DATA_ERROR(OneClassOnly);
MTC_DATA_ERROR(CorruptStore);
// features
MTC_DATA_ERROR(InsufficientPayload);
MTC_DATA_ERROR(ShapeMismatch);
MTC_DATA_ERROR(CorruptTensorFile);
// models
MTC_DATA_ERROR(EmptyTrainingSet);
MTC_DATA_ERROR(DimensionMismatch);
MTC_DATA_ERROR(CorruptModelFile);
// eval
MTC_DATA_ERROR(LengthMismatch);
MTC_DATA_ERROR(UnknownLabel);
MTC_DATA_ERROR(ClassTooSmall);
MTC_DATA_ERROR(UnknownFamily);
MTC_DATA_ERROR(CorruptReport);

#undef MTC_DATA_ERROR

} // namespace mtc
