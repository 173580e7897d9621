#pragma once

#include <stdexcept>
#include <string>

namespace pwcg {

enum class Errc {
  Parse,
  Validation,
  UnknownNode,
  Precondition,
  Infeasible,
  SearchSpaceTooLarge,
  DoubleAllocation,
  UnknownOwner,
  NoModulation,
  NoFailure,
  Config,
  Io,
  Internal,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::Parse: return "parse error";
    case Errc::Validation: return "validation error";
    case Errc::UnknownNode: return "unknown node";
    case Errc::Precondition: return "precondition violation";
    case Errc::Infeasible: return "infeasible";
    case Errc::SearchSpaceTooLarge: return "search space too large";
    case Errc::DoubleAllocation: return "double allocation";
    case Errc::UnknownOwner: return "unknown owner";
    case Errc::NoModulation: return "no modulation";
    case Errc::NoFailure: return "no failure";
    case Errc::Config: return "configuration error";
    case Errc::Io: return "i/o error";
    case Errc::Internal: return "internal invariant failure";
  }
  return "error";
}

// Every library failure is reported through this type; `code()` lets callers
// (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pwcg
