#include "sde/error.hpp"

namespace sde {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
    case ErrorCode::RunAborted: return "RUN_ABORTED";
    case ErrorCode::IncompleteRun: return "INCOMPLETE_RUN";
    case ErrorCode::JudgeUnavailable: return "JUDGE_UNAVAILABLE";
    case ErrorCode::VersionMismatch: return "VERSION_MISMATCH";
    case ErrorCode::NoBlock: return "NO_BLOCK";
    case ErrorCode::MultipleBlocks: return "MULTIPLE_BLOCKS";
    case ErrorCode::RangeError: return "RANGE_ERROR";
    case ErrorCode::EnumError: return "ENUM_ERROR";
    case ErrorCode::MissingField: return "MISSING_FIELD";
    case ErrorCode::ConsistencyError: return "CONSISTENCY_ERROR";
    case ErrorCode::MissingSide: return "MISSING_SIDE";
    case ErrorCode::MissingRow: return "MISSING_ROW";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::DuplicateFamily: return "DUPLICATE_FAMILY";
    case ErrorCode::WrongReadout: return "WRONG_READOUT";
    case ErrorCode::SuiteMismatch: return "SUITE_MISMATCH";
    case ErrorCode::UnknownBaseline: return "UNKNOWN_BASELINE";
    case ErrorCode::ReadoutMismatch: return "READOUT_MISMATCH";
    case ErrorCode::MissingFamily: return "MISSING_FAMILY";
    case ErrorCode::InvalidUnits: return "INVALID_UNITS";
    case ErrorCode::MissingSection: return "MISSING_SECTION";
    case ErrorCode::MissingInput: return "MISSING_INPUT";
    case ErrorCode::IntegrityError: return "INTEGRITY_ERROR";
    case ErrorCode::UsageError: return "USAGE_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace sde
