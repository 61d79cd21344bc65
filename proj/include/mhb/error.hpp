#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mhb {

enum class ErrorCode {
  // chain-core
  NonStochasticRow,
  NegativeEntry,
  BadInitial,
  NotSquare,
  NotIrreducible,
  SingularSystem,
  NoStationary,
  MissingInitial,
  BadReward,
  // concentration
  BadBoundSpec,
  BadQuery,
  FormMismatch,
  BadDelta,
  TooLarge,
  SupportMismatch,
  // bandits
  BadInstance,
  TiedBestArm,
  BetaBelowFloor,
  BetaNotAboveFloor,
  HorizonTooSmall,
  GammaNotAboveTwo,
  DimensionMismatch,
  BadParameter,
  // harness
  ConfigParse,
  FileNotFound,
};

std::string_view to_string(ErrorCode code);

/// Module that raised an error; carried so the CLI can report provenance.
std::string_view module_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mhb
