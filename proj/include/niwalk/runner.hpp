#pragma once

#include <string>
#include <vector>

#include "niwalk/config.hpp"
#include "niwalk/validate.hpp"

namespace niwalk {

struct Artifact {
    std::string filename;  // relative to the configured output directory
    std::string content;
};

struct RunReport {
    bool complete = true;      // survival/tuple runs may stop at a checkpoint
    bool checks_pass = true;   // validate only
    std::vector<Artifact> artifacts;
    std::vector<std::string> summary_lines;
};

/// Runs the configured experiment and renders its artifacts. Pure function of
/// (config, control, resume state): identical inputs give identical bytes.
RunReport run_experiment(const ExperimentConfig& config, const RunControl& control = {},
                         const ExperimentProgress* resume_from = nullptr);

/// Parses any niwalk artifact, prints a human-readable table to `out`, and
/// returns two-column plot-data files derived from it.
std::vector<Artifact> render_report(const std::string& artifact_text, std::string& out);

}  // namespace niwalk
