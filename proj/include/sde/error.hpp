// Error and finding model shared by every sde module.
//
// Hard failures (unreadable file, malformed document, violated operation
// precondition) throw SdeError carrying a typed code. Rule violations that a
// validator or linter is supposed to *report* are Findings, never exceptions.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sde {

enum class ErrorCode {
  IoError,
  ParseError,
  SchemaError,
  ConfigError,
  RunAborted,
  IncompleteRun,
  JudgeUnavailable,
  VersionMismatch,
  NoBlock,
  MultipleBlocks,
  RangeError,
  EnumError,
  MissingField,
  ConsistencyError,
  MissingSide,
  MissingRow,
  EmptyInput,
  DuplicateFamily,
  WrongReadout,
  SuiteMismatch,
  UnknownBaseline,
  ReadoutMismatch,
  MissingFamily,
  InvalidUnits,
  MissingSection,
  MissingInput,
  IntegrityError,
  UsageError,
};

const char* error_code_name(ErrorCode code);

class SdeError : public std::runtime_error {
 public:
  SdeError(ErrorCode code, std::string detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

enum class Severity { Error, Warning };

// One validator or linter observation. `path` locates the offending record,
// e.g. "families[3].records[7]" or a prompt id.
struct Finding {
  std::string code;
  std::string path;
  std::string message;
  Severity severity = Severity::Error;
};

struct ValidationReport {
  bool ok = true;
  int family_count = 0;
  int prompt_count = 0;
  std::vector<Finding> findings;

  void add(std::string code, std::string path, std::string message,
           Severity severity = Severity::Error) {
    if (severity == Severity::Error) ok = false;
    findings.push_back(
        {std::move(code), std::move(path), std::move(message), severity});
  }
};

}  // namespace sde
