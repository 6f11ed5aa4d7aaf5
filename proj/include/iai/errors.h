#pragma once

#include <stdexcept>
#include <string>

namespace iai {

// Base for every error the pipeline raises. `kind()` is a stable short tag
// used by the HTTP layer and the CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define IAI_DEFINE_ERROR(Name, tag)                                            \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& message) : Error(tag, message) {}     \
    };

IAI_DEFINE_ERROR(ContractViolation, "contract_violation")
IAI_DEFINE_ERROR(ReplayOrderError, "replay_order")
IAI_DEFINE_ERROR(NotFoundError, "not_found")
IAI_DEFINE_ERROR(CapacityError, "capacity")
IAI_DEFINE_ERROR(OrderingError, "ordering")
IAI_DEFINE_ERROR(PersistenceError, "persistence")
IAI_DEFINE_ERROR(DomainError, "domain")
IAI_DEFINE_ERROR(NumericalOverflow, "numerical_overflow")
IAI_DEFINE_ERROR(DegenerateInput, "degenerate_input")
IAI_DEFINE_ERROR(DegenerateWindow, "degenerate_window")
IAI_DEFINE_ERROR(DataQualityError, "data_quality")
IAI_DEFINE_ERROR(JoinError, "join")
IAI_DEFINE_ERROR(CollinearityError, "collinearity")
IAI_DEFINE_ERROR(DegenerateModel, "degenerate_model")
IAI_DEFINE_ERROR(ParseError, "parse")
IAI_DEFINE_ERROR(NetworkError, "network")

#undef IAI_DEFINE_ERROR

// Raised when every optimizer start fails; carries a per-start summary.
class EstimationFailure : public Error {
public:
    EstimationFailure(const std::string& message, std::string diagnostics)
        : Error("estimation_failure", message), diagnostics_(std::move(diagnostics)) {}

    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

}  // namespace iai
