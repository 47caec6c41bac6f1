#pragma once

#include <stdexcept>
#include <string>

namespace l2t {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct BackendMismatch : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct NotInvertible : Error { using Error::Error; };
struct NotInjective : Error { using Error::Error; };
struct NotSelfAdjoint : Error { using Error::Error; };
struct NotExact : Error { using Error::Error; };
struct NotAnIsomorphism : Error { using Error::Error; };
struct NotAcyclic : Error { using Error::Error; };
struct NotAChainMap : Error { using Error::Error; };
struct NoCanonicalElement : Error { using Error::Error; };
struct VerdictInconclusive : Error { using Error::Error; };
struct NotUnimodular : Error { using Error::Error; };
struct Unsupported : Error { using Error::Error; };

}  // namespace l2t
