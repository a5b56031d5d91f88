#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "niwalk/curve.hpp"
#include "niwalk/splitting.hpp"
#include "niwalk/survival.hpp"

namespace niwalk {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { validate, survival, tuple, pathspace, splitting, mixing, cone };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from(const std::string& name);

struct ValidateParams {
    std::uint64_t gambler_trials = 1'000'000;
    std::uint64_t ball_trials = 100'000;
    std::uint64_t step6_draws = 6'000'000;
    std::uint64_t cone_trials = 4'000;
};

struct SurvivalParams {
    std::uint32_t group_m = 1;
    std::uint32_t group_n = 1;
    std::uint64_t pairs = 100'000;
    std::uint64_t max_steps = 10'000;
    std::vector<std::uint64_t> checkpoints;
    std::uint64_t h_lag = 10'000;
    double checkpoint_every_seconds = 60.0;
};

struct PathspaceParams {
    StartConfig start;
    int shells = 2;
    std::uint64_t trials = 10'000;
    bool eval_sep = false;
};

struct SplittingParams {
    StartConfig start;
    std::uint32_t particles = 1'000;
    std::uint32_t replicates = 20;
    int shells = 2;
    bool eval_sep = false;
    double sep_relaxed_scale = 4.0;
    int xi_window_lo = 2;
    int xi_window_hi = 0;  // 0 = shells
    double xi_ref = 0.57;
};

struct MixingParams {
    StartConfig start_a;
    StartConfig start_b;
    int n_min = 2;
    int n_max = 5;
    MixingFunctional functional = MixingFunctional::endpoint_angle;
    std::uint32_t particles = 1'000;
    std::uint32_t replicates = 20;
};

struct ConeParams {
    double axis_x = 1.0, axis_y = 0.0, axis_z = 0.0;
    double half_angle = 1.5707963267948966;
    int shells = 4;
    std::uint32_t particles = 1'000;
    std::uint32_t replicates = 8;
    int burn_in = 1;
    double step_eps = 0.02;
};

/// One experiment, fully specified: a config embedded in an artifact
/// reproduces that artifact exactly.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::survival;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 = hardware
    std::string out_dir = "out";

    ValidateParams validate;
    SurvivalParams survival;
    PathspaceParams pathspace;
    SplittingParams splitting;
    MixingParams mixing;
    ConeParams cone;
};

/// Canonical JSON for the config (only the active experiment's section).
std::string config_to_json(const ExperimentConfig& config);

/// Strict parse: unknown fields anywhere are rejected with data_error.
ExperimentConfig config_from_json(const std::string& text);

std::uint64_t config_hash(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// artifacts

/// Survival CSV, Table-1 layout plus errors: n, M(n), k(n), se_k, h(n), se_h.
/// The config, seed, and version ride in '#' header comments; floats use
/// shortest round-trip formatting, '.' decimal, no separators.
std::string survival_csv(const SurvivalTable& table, const ExperimentConfig& config);

/// Parses an artifact produced by survival_csv (including the embedded config).
struct SurvivalArtifact {
    ExperimentConfig config;
    SurvivalTable table;
};
SurvivalArtifact parse_survival_csv(const std::string& text);

/// Checkpoint file for interrupted survival/tuple runs.
std::string checkpoint_to_json(const ExperimentConfig& config,
                               const ExperimentProgress& progress);
struct CheckpointFile {
    ExperimentConfig config;
    ExperimentProgress progress;
};
CheckpointFile checkpoint_from_json(const std::string& text);

std::string write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace niwalk
