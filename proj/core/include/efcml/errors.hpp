#pragma once

#include <stdexcept>
#include <string>

namespace efcml {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ingest
struct MalformedFileError : Error { using Error::Error; };
struct UnknownLabelError : Error { using Error::Error; };
struct NonNumericFeatureError : Error { using Error::Error; };
struct MissingValueError : Error { using Error::Error; };
struct RaggedRowsError : Error { using Error::Error; };
struct NonBinaryLabelError : Error { using Error::Error; };
struct EmptyDatasetError : Error { using Error::Error; };
struct StreamEmptyError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// numerics
struct DimensionMismatchError : Error { using Error::Error; };
struct IndexOutOfRangeError : Error { using Error::Error; };
struct SingularHessianError : Error { using Error::Error; };
struct NonFiniteInputError : Error { using Error::Error; };
struct NoPositiveLabelError : Error { using Error::Error; };

// harness
struct BatchTooSmallError : Error { using Error::Error; };

}  // namespace efcml
