#pragma once

#include <stdexcept>
#include <string>

namespace crashlab {

// Every failure mode the library reports, so callers and tests can match on
// the condition instead of parsing message text.
enum class Errc {
  // ingest
  MissingColumn,
  BadValue,
  DuplicateId,
  AllDamageMissing,
  // descriptive
  UnknownDimension,
  DegenerateInput,
  // inferential
  ZeroExpected,
  LengthMismatch,
  NonPositiveExpected,
  DomainError,
  // spatial
  EmptyInput,
  NonPositiveBandwidth,
  ZeroVariance,
  // glm
  ZeroMean,
  RankDeficient,
  NotConverged,
  SeparationSuspect,
  // forest
  SingleClass,
  SchemaMismatch,
  NoSplits,
  DegenerateFeatures,
  // synth
  InconsistentMarginals,
  // cli
  EmptyTable,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::BadValue: return "BadValue";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::AllDamageMissing: return "AllDamageMissing";
    case Errc::UnknownDimension: return "UnknownDimension";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::ZeroExpected: return "ZeroExpected";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::NonPositiveExpected: return "NonPositiveExpected";
    case Errc::DomainError: return "DomainError";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::ZeroMean: return "ZeroMean";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NotConverged: return "NotConverged";
    case Errc::SeparationSuspect: return "SeparationSuspect";
    case Errc::SingleClass: return "SingleClass";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::NoSplits: return "NoSplits";
    case Errc::DegenerateFeatures: return "DegenerateFeatures";
    case Errc::InconsistentMarginals: return "InconsistentMarginals";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace crashlab
