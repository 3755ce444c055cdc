#pragma once

#include <stdexcept>
#include <string>

namespace prw {

// Failure categories. The CLI maps usage-type codes to exit 1 and
// model/applicability codes (drift, moment, hazard gates) to exit 2.
enum class ErrorCode {
    invalid_parameter,
    invalid_drift,
    infinite_mean,
    divergent_integral,
    divergent_moment,
    undefined_hazard,
    no_root,
    unsupported_family,
    unsupported_dependence,
    horizon_too_small,
    step_cap_exceeded,
    truncation_unbounded,
    non_convergence,
    no_plateau,
    degenerate_fit,
    condition_violated,
    inapplicable_model,
    config_error,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace prw
