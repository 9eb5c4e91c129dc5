#include "crisis/error.hpp"

namespace crisis {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileUnreadable: return "FileUnreadable";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::CatalogMismatch: return "CatalogMismatch";
    case ErrorCode::NoCompleteRows: return "NoCompleteRows";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DegenerateCorpus: return "DegenerateCorpus";
    case ErrorCode::EmptyTestset: return "EmptyTestset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::IncompleteVector: return "IncompleteVector";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutputUnwritable: return "OutputUnwritable";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateInput:
    case ErrorCode::NotSymmetric:
    case ErrorCode::NoConvergence:
    case ErrorCode::ZeroColumn:
    case ErrorCode::InvalidRho:
      return 2;
    case ErrorCode::ConfigError:
      return 3;
    default:
      return 1;
  }
}

namespace {

std::string compose(ErrorCode code, const std::string& detail, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += std::string(to_string(code));
  out += ": ";
  out += detail;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message)
    : Error(code, message, std::string()) {}

Error::Error(ErrorCode code, std::string detail, std::string stage)
    : std::runtime_error(compose(code, detail, stage)),
      code_(code),
      detail_(std::move(detail)),
      stage_(std::move(stage)) {}

Error Error::with_stage(std::string stage) const {
  if (!stage_.empty()) return *this;
  return Error(code_, detail_, std::move(stage));
}

}  // namespace crisis
