#pragma once

#include <stdexcept>
#include <string>

namespace gbundles {

enum class ErrKind {
  NotAssociative,
  NoIdentity,
  NoInverse,
  TooLarge,
  NotAutomorphism,
  NotHomomorphism,
  NonTransitiveVertexFiber,
  NonFreeEdgeFiber,
  NonEquivariantIncidence,
  OrientationViolation,
  CocycleViolation,
  EdgeCompatViolation,
  MismatchedContext,
  LocalTypeMismatch,
  InvalidTorsor,
  BudgetExceeded,
  VerificationFailed,
  ParseError,
  ValidationError,
};

inline const char* err_name(ErrKind k) {
  switch (k) {
    case ErrKind::NotAssociative: return "NotAssociative";
    case ErrKind::NoIdentity: return "NoIdentity";
    case ErrKind::NoInverse: return "NoInverse";
    case ErrKind::TooLarge: return "TooLarge";
    case ErrKind::NotAutomorphism: return "NotAutomorphism";
    case ErrKind::NotHomomorphism: return "NotHomomorphism";
    case ErrKind::NonTransitiveVertexFiber: return "NonTransitiveVertexFiber";
    case ErrKind::NonFreeEdgeFiber: return "NonFreeEdgeFiber";
    case ErrKind::NonEquivariantIncidence: return "NonEquivariantIncidence";
    case ErrKind::OrientationViolation: return "OrientationViolation";
    case ErrKind::CocycleViolation: return "CocycleViolation";
    case ErrKind::EdgeCompatViolation: return "EdgeCompatViolation";
    case ErrKind::MismatchedContext: return "MismatchedContext";
    case ErrKind::LocalTypeMismatch: return "LocalTypeMismatch";
    case ErrKind::InvalidTorsor: return "InvalidTorsor";
    case ErrKind::BudgetExceeded: return "BudgetExceeded";
    case ErrKind::VerificationFailed: return "VerificationFailed";
    case ErrKind::ParseError: return "ParseError";
    case ErrKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, const std::string& msg)
      : std::runtime_error(std::string(err_name(kind)) + ": " + msg), kind_(kind) {}

  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

[[noreturn]] inline void fail(ErrKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace gbundles
