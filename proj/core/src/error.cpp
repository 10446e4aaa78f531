#include "priorseg/error.hpp"

namespace priorseg {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::ByteSwapped: return "ByteSwapped";
        case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::DimOutOfRange: return "DimOutOfRange";
        case ErrorCode::BadPixdim: return "BadPixdim";
        case ErrorCode::BadVoxOffset: return "BadVoxOffset";
        case ErrorCode::BadHeaderField: return "BadHeaderField";
        case ErrorCode::BadGzip: return "BadGzip";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::BadLabelValue: return "BadLabelValue";
        case ErrorCode::ValueOverflow: return "ValueOverflow";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::UnknownStructureName: return "UnknownStructureName";
        case ErrorCode::DuplicatePatientId: return "DuplicatePatientId";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::TooManyStructures: return "TooManyStructures";
        case ErrorCode::MissingStructure: return "MissingStructure";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::EmptyLandmark: return "EmptyLandmark";
        case ErrorCode::NonMonotonicLandmarks: return "NonMonotonicLandmarks";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::SliceOutOfRange: return "SliceOutOfRange";
    }
    return "UnknownError";
}

}  // namespace priorseg
