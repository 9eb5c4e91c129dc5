#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crisis {

enum class ErrorCode {
  FileUnreadable,
  SchemaViolation,
  EmptyDataset,
  MissingData,
  InvalidWindow,
  CatalogMismatch,
  NoCompleteRows,
  EmptySequence,
  EmptyCorpus,
  DegenerateCorpus,
  EmptyTestset,
  LengthMismatch,
  DegenerateInput,
  NotSymmetric,
  NoConvergence,
  ZeroColumn,
  IncompleteVector,
  InvalidRho,
  InvalidArgument,
  OutputUnwritable,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Process exit status for a failure of this kind: 1 input, 2 numeric, 3 config.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }
  const std::string& stage() const { return stage_; }

  // Returns a copy tagged with the pipeline stage that raised it. The stage
  // recorded first wins so that nested orchestration keeps the innermost one.
  Error with_stage(std::string stage) const;

 private:
  Error(ErrorCode code, std::string detail, std::string stage);

  ErrorCode code_;
  std::string detail_;
  std::string stage_;
};

}  // namespace crisis
