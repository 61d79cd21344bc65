#include "mhb/error.hpp"

namespace mhb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonStochasticRow: return "NonStochasticRow";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::BadInitial: return "BadInitial";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NoStationary: return "NoStationary";
    case ErrorCode::MissingInitial: return "MissingInitial";
    case ErrorCode::BadReward: return "BadReward";
    case ErrorCode::BadBoundSpec: return "BadBoundSpec";
    case ErrorCode::BadQuery: return "BadQuery";
    case ErrorCode::FormMismatch: return "FormMismatch";
    case ErrorCode::BadDelta: return "BadDelta";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::BadInstance: return "BadInstance";
    case ErrorCode::TiedBestArm: return "TiedBestArm";
    case ErrorCode::BetaBelowFloor: return "BetaBelowFloor";
    case ErrorCode::BetaNotAboveFloor: return "BetaNotAboveFloor";
    case ErrorCode::HorizonTooSmall: return "HorizonTooSmall";
    case ErrorCode::GammaNotAboveTwo: return "GammaNotAboveTwo";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::FileNotFound: return "FileNotFound";
  }
  return "Unknown";
}

std::string_view module_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonStochasticRow:
    case ErrorCode::NegativeEntry:
    case ErrorCode::BadInitial:
    case ErrorCode::NotSquare:
    case ErrorCode::NotIrreducible:
    case ErrorCode::SingularSystem:
    case ErrorCode::NoStationary:
    case ErrorCode::MissingInitial:
    case ErrorCode::BadReward:
      return "chain-core";
    case ErrorCode::BadBoundSpec:
    case ErrorCode::BadQuery:
    case ErrorCode::FormMismatch:
    case ErrorCode::BadDelta:
    case ErrorCode::TooLarge:
    case ErrorCode::SupportMismatch:
      return "concentration";
    case ErrorCode::BadInstance:
    case ErrorCode::TiedBestArm:
    case ErrorCode::BetaBelowFloor:
    case ErrorCode::BetaNotAboveFloor:
    case ErrorCode::HorizonTooSmall:
    case ErrorCode::GammaNotAboveTwo:
    case ErrorCode::DimensionMismatch:
      return "bandits";
    case ErrorCode::BadParameter:
      return "arguments";
    case ErrorCode::ConfigParse:
    case ErrorCode::FileNotFound:
      return "harness";
  }
  return "unknown";
}

}  // namespace mhb
