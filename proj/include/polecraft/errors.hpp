#pragma once

#include <stdexcept>
#include <string>

namespace polecraft {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// matcore
struct RankDeficientInput : Error { using Error::Error; };
struct EmptyNullSpace : Error { using Error::Error; };

// model
struct UnmatchedConjugate : Error { using Error::Error; };
struct NotControllable : Error { using Error::Error; };
struct RankDeficientB : Error { using Error::Error; };

// step subproblems
struct DegenerateDirection : Error { using Error::Error; };
struct OrthogonalityLoss : Error { using Error::Error; };
struct LinearlyDependentParts : Error { using Error::Error; };
struct InfeasibleBalancing : Error { using Error::Error; };
struct SubspaceTooSmall : Error { using Error::Error; };
struct NoViableCandidate : Error { using Error::Error; };

// solver
struct AllStartsFailed : Error { using Error::Error; };

// file I/O
struct ParseError : Error { using Error::Error; };

}  // namespace polecraft
