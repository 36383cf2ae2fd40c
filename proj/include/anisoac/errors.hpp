#pragma once

#include <stdexcept>
#include <string>

namespace anisoac {

// Every library failure derives from Error so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error { using Error::Error; };
struct SingularDirection : Error { using Error::Error; };
struct ConvexityViolation : Error { using Error::Error; };
struct InvalidFront : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct BalanceViolation : Error { using Error::Error; };
struct BistabilityError : Error { using Error::Error; };
struct StabilityError : Error { using Error::Error; };
struct TopologyChange : Error { using Error::Error; };
struct DegenerateNormal : Error { using Error::Error; };
struct LedgerInfeasible : Error {
  LedgerInfeasible(const std::string& constraint, const std::string& detail)
      : Error("ledger infeasible: " + constraint + " (" + detail + ")"), constraint(constraint) {}
  std::string constraint;
};
struct MeasurementFailure : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace anisoac
