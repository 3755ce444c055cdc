#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prw/distributions.hpp"
#include "prw/walk_sim.hpp"

namespace prw {

// All syntax problems found in a config, reported together.
class ConfigParseError : public std::runtime_error {
public:
    explicit ConfigParseError(std::vector<std::string> errors_)
        : std::runtime_error(join(errors_)), errors(std::move(errors_)) {}

    std::vector<std::string> errors;

private:
    static std::string join(const std::vector<std::string>& es) {
        std::string s;
        for (const auto& e : es) {
            if (!s.empty()) s += "; ";
            s += e;
        }
        return s;
    }
};

// Parsed key=value model description. Unknown keys are hard errors.
struct ModelConfig {
    std::optional<DistributionSpec> increment;
    std::optional<DistributionSpec> perturbation;
    Dependence dependence = Dependence::independent;
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    // production scenario laws
    std::optional<DistributionSpec> interarrival;
    std::optional<DistributionSpec> service;
    std::optional<DistributionSpec> delay;

    // Builds the walk model; model-condition violations (drift, moments)
    // surface here as prw::Error.
    WalkModel build() const;

    std::string serialize() const;
};

// Parses key=value text ('#' starts a comment). Collects every syntax
// error before throwing ConfigParseError.
ModelConfig parse_config(const std::string& text);

ModelConfig load_config_file(const std::string& path);

} // namespace prw
