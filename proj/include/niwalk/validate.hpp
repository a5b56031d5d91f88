#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "niwalk/config.hpp"

namespace niwalk {

/// One exact-law check: the observed value, the law's value, and the
/// tolerance actually enforced.
struct ValidationCheck {
    std::string name;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Runs the exact-law oracles against the walk steppers: gambler's ruin 1/n,
/// sphere hitting e^-k, step-direction uniformity, Gaussian moments, the
/// mean-hitting-time identity, the coordinate martingale, and cone-survival
/// shape checks.
ValidationReport run_validation(const ValidateParams& params, std::uint64_t master_seed,
                                unsigned threads);

std::string validation_report_json(const ValidationReport& report,
                                   const ExperimentConfig& config);

}  // namespace niwalk
