#pragma once

#include <stdexcept>
#include <string>

namespace priorseg {

// Every failure surfaced by the library carries one of these codes so callers
// can branch on the kind of problem without parsing message text.
enum class ErrorCode {
    // nifti_io
    BadMagic,
    ByteSwapped,
    UnsupportedDatatype,
    TruncatedFile,
    DimOutOfRange,
    BadPixdim,
    BadVoxOffset,
    BadHeaderField,
    BadGzip,
    NonFiniteValue,
    BadLabelValue,
    ValueOverflow,
    IoFailure,
    GridMismatch,
    // cohort
    SchemaError,
    UnknownStructureName,
    DuplicatePatientId,
    MissingFile,
    // prior_encoding
    TooManyStructures,
    MissingStructure,
    // surface_metrics
    EmptyMask,
    // region_partition
    EmptyLandmark,
    NonMonotonicLandmarks,
    // fairness_stats
    EmptyGroup,
    // report_cli
    SliceOutOfRange,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace priorseg
