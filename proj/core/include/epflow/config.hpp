#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epflow/dynamics.hpp"
#include "epflow/model.hpp"

namespace epflow {

/// Initial-data presets resolvable against a discretized reference.
struct InitialSpec {
    std::string positions = "identity"; // identity | equilibrium | spread | random
    double position_scale = 1.0;        // spread factor / random gap scale
    std::string velocities = "zero";    // zero | linear | sine | random | approach
    double velocity_scale = 0.0;
};

struct DiscretizationSpec {
    std::size_t n = 32;
    std::string density = "uniform"; // uniform only, on [lower, upper]
    double lower = 0.0;
    double upper = 1.0;
    double mass = 1.0;
};

struct ExperimentSpec {
    std::string name; // optional; must match the subcommand when set
    std::vector<double> epsilon_list = {0.2, 0.1, 0.05, 0.025};
    double s_end = 2.0;
    double horizon = 10.0;
    bool with_collision = false;
};

struct RunConfig {
    ModelSpec model;
    DiscretizationSpec discretization;
    IntegratorConfig integrator;
    InitialSpec initial;
    ExperimentSpec experiment;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::map<std::string, double> tolerances;
};

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty() && config.has_value(); }
};

/// Parse the key-value config format ([section] headers, `key = value`
/// lines, `#` comments). Unknown sections or keys are errors, not warnings;
/// out-of-range values report the violated bound. All errors are collected,
/// not just the first.
ParseResult parse_config(std::string_view text);

/// Same, with `EPFLOW_<SECTION>_<KEY>` environment variables applied on top
/// of the file before validation.
ParseResult parse_config_with_env(std::string_view text);

ReferenceMeasure make_reference(const DiscretizationSpec& spec);
LagrangianState make_initial_state(const RunConfig& config, const ReferenceMeasure& ref);

} // namespace epflow
