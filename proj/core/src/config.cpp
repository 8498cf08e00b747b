#include "epflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "epflow/sampling.hpp"

namespace epflow {

namespace {

using KeyMap = std::map<std::string, std::map<std::string, std::string>>;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> table = {
        {"", {"seed", "threads"}},
        {"model", {"formulation", "p", "q", "kappa_r", "kappa_a", "gamma"}},
        {"discretization", {"n", "density", "lower", "upper", "mass"}},
        {"integrator", {"scheme", "dt", "t_end", "stride", "epsilon"}},
        {"initial", {"positions", "position_scale", "velocities", "velocity_scale"}},
        {"experiment", {"name", "epsilon_list", "s_end", "horizon", "with_collision"}},
        {"output", {"dir"}},
        {"tolerances",
         {"residual", "relative_increase", "slope_min", "slope_max", "force_error"}},
    };
    return table;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

struct Reader {
    const KeyMap& values;
    std::vector<std::string>& errors;

    const std::string* find(const std::string& section, const std::string& key) const {
        const auto sit = values.find(section);
        if (sit == values.end()) return nullptr;
        const auto kit = sit->second.find(key);
        return kit == sit->second.end() ? nullptr : &kit->second;
    }

    std::string where(const std::string& section, const std::string& key) const {
        return section.empty() ? key : section + "." + key;
    }

    bool number(const std::string& section, const std::string& key, double& out) const {
        const std::string* raw = find(section, key);
        if (!raw) return false;
        try {
            std::size_t used = 0;
            out = std::stod(*raw, &used);
            if (used != raw->size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            errors.push_back(where(section, key) + ": not a number (got '" + *raw + "')");
            return false;
        }
        return true;
    }

    bool integer(const std::string& section, const std::string& key, std::uint64_t& out) const {
        const std::string* raw = find(section, key);
        if (!raw) return false;
        try {
            std::size_t used = 0;
            out = std::stoull(*raw, &used);
            if (used != raw->size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            errors.push_back(where(section, key) + ": not a nonnegative integer (got '" + *raw +
                             "')");
            return false;
        }
        return true;
    }

    bool boolean(const std::string& section, const std::string& key, bool& out) const {
        const std::string* raw = find(section, key);
        if (!raw) return false;
        if (*raw == "true" || *raw == "1") {
            out = true;
        } else if (*raw == "false" || *raw == "0") {
            out = false;
        } else {
            errors.push_back(where(section, key) + ": expected true/false (got '" + *raw + "')");
            return false;
        }
        return true;
    }

    bool text(const std::string& section, const std::string& key, std::string& out) const {
        const std::string* raw = find(section, key);
        if (!raw) return false;
        out = *raw;
        return true;
    }
};

KeyMap read_lines(std::string_view textview, std::vector<std::string>& errors) {
    KeyMap values;
    std::istringstream stream{std::string(textview)};
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (known_keys().find(section) == known_keys().end())
                errors.push_back("line " + std::to_string(lineno) + ": unknown section [" +
                                 section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto sit = known_keys().find(section);
        if (sit != known_keys().end() && sit->second.find(key) == sit->second.end()) {
            errors.push_back("unknown key '" + (section.empty() ? key : section + "." + key) +
                             "'");
            continue;
        }
        values[section][key] = value;
    }
    return values;
}

void apply_env(KeyMap& values) {
    for (const auto& [section, keys] : known_keys()) {
        for (const auto& key : keys) {
            const std::string name = "EPFLOW_" + (section.empty() ? upper(key)
                                                                  : upper(section) + "_" + upper(key));
            if (const char* env = std::getenv(name.c_str())) values[section][key] = env;
        }
    }
}

ParseResult build_config(KeyMap values, std::vector<std::string> errors) {
    RunConfig config;
    Reader in{values, errors};

    std::uint64_t u64 = 0;
    if (in.integer("", "seed", u64)) config.seed = u64;
    if (in.integer("", "threads", u64)) {
        if (u64 == 0)
            errors.push_back("threads: must be >= 1");
        else
            config.threads = static_cast<unsigned>(u64);
    }

    // [model]
    std::string formulation = "B";
    in.text("model", "formulation", formulation);
    bool pressureless = false;
    if (formulation == "B" || formulation == "pressureless") {
        pressureless = true;
        config.model = ModelSpec::pressureless();
    } else if (formulation == "A" || formulation == "pressure") {
        config.model = ModelSpec::with_pressure(0.5, 1.5, 2.0);
    } else {
        errors.push_back("model.formulation: must be A or B (got '" + formulation + "')");
    }
    double x = 0.0;
    if (in.number("model", "p", x)) {
        if (!(x > -1.0 && x <= 1.0) || x == 0.0)
            errors.push_back("model.p: must be in (-1, 1] and nonzero (got " + std::to_string(x) +
                             ")");
        else if (pressureless && x != 1.0)
            errors.push_back("model.p: the pressureless family requires p = 1");
        else
            config.model.p = x;
    }
    if (in.number("model", "q", x)) {
        if (!(x >= 1.0))
            errors.push_back("model.q: must be >= 1 (got " + std::to_string(x) + ")");
        else if (pressureless && x != 2.0)
            errors.push_back("model.q: the pressureless family requires q = 2");
        else
            config.model.q = x;
    }
    if (in.number("model", "kappa_r", x)) {
        if (x < 0.0)
            errors.push_back("model.kappa_r: must be >= 0");
        else if (pressureless && x != 0.25)
            errors.push_back("model.kappa_r: the pressureless family requires 1/4");
        else
            config.model.kappa_r = x;
    }
    if (in.number("model", "kappa_a", x)) {
        if (x < 0.0)
            errors.push_back("model.kappa_a: must be >= 0");
        else if (pressureless && x != 0.25)
            errors.push_back("model.kappa_a: the pressureless family requires 1/4");
        else
            config.model.kappa_a = x;
    }
    if (in.number("model", "gamma", x)) {
        if (!(x > 1.0))
            errors.push_back("model.gamma: must be > 1 (got " + std::to_string(x) + ")");
        else if (pressureless)
            errors.push_back("model.gamma: the pressureless family has no pressure energy");
        else
            config.model.gamma = x;
    }

    // [discretization]
    if (in.integer("discretization", "n", u64)) {
        if (u64 < 2)
            errors.push_back("discretization.n: must be >= 2");
        else
            config.discretization.n = static_cast<std::size_t>(u64);
    }
    in.text("discretization", "density", config.discretization.density);
    if (config.discretization.density != "uniform")
        errors.push_back("discretization.density: only 'uniform' is supported");
    in.number("discretization", "lower", config.discretization.lower);
    in.number("discretization", "upper", config.discretization.upper);
    if (!(config.discretization.upper > config.discretization.lower))
        errors.push_back("discretization.upper: must exceed discretization.lower");
    if (in.number("discretization", "mass", x)) {
        if (!(x > 0.0))
            errors.push_back("discretization.mass: must be positive");
        else
            config.discretization.mass = x;
    }
    if (pressureless && std::abs(config.discretization.mass - 1.0) > 1e-12)
        errors.push_back("discretization.mass: the pressureless family requires total mass 1");

    // [integrator]
    std::string scheme = "leapfrog";
    in.text("integrator", "scheme", scheme);
    if (scheme == "leapfrog") {
        config.integrator.scheme = Scheme::Leapfrog;
    } else if (scheme == "damped-leapfrog") {
        config.integrator.scheme = Scheme::DampedLeapfrog;
    } else if (scheme == "gradient-euler") {
        config.integrator.scheme = Scheme::GradientEuler;
    } else {
        errors.push_back("integrator.scheme: must be leapfrog, damped-leapfrog or gradient-euler");
    }
    if (in.number("integrator", "dt", x)) {
        if (!(x > 0.0))
            errors.push_back("integrator.dt: must be positive");
        else
            config.integrator.dt = x;
    }
    if (in.number("integrator", "t_end", x)) {
        if (x < 0.0)
            errors.push_back("integrator.t_end: must be nonnegative");
        else
            config.integrator.t_end = x;
    }
    if (in.integer("integrator", "stride", u64)) {
        if (u64 == 0)
            errors.push_back("integrator.stride: must be >= 1");
        else
            config.integrator.output_stride = static_cast<std::size_t>(u64);
    }
    if (in.number("integrator", "epsilon", x)) {
        if (!(x > 0.0))
            errors.push_back("integrator.epsilon: must be positive");
        else
            config.integrator.epsilon = x;
    }

    // [initial]
    in.text("initial", "positions", config.initial.positions);
    if (config.initial.positions != "identity" && config.initial.positions != "equilibrium" &&
        config.initial.positions != "spread" && config.initial.positions != "random")
        errors.push_back("initial.positions: must be identity, equilibrium, spread or random");
    in.number("initial", "position_scale", config.initial.position_scale);
    in.text("initial", "velocities", config.initial.velocities);
    if (config.initial.velocities != "zero" && config.initial.velocities != "linear" &&
        config.initial.velocities != "sine" && config.initial.velocities != "random" &&
        config.initial.velocities != "approach")
        errors.push_back("initial.velocities: must be zero, linear, sine, random or approach");
    in.number("initial", "velocity_scale", config.initial.velocity_scale);

    // [experiment]
    in.text("experiment", "name", config.experiment.name);
    if (!config.experiment.name.empty()) {
        static const std::set<std::string> names = {"simulate",    "compare",
                                                    "sweep-friction", "rarefaction",
                                                    "check-bounds", "oracle-check"};
        if (names.find(config.experiment.name) == names.end())
            errors.push_back("experiment.name: unknown experiment '" + config.experiment.name +
                             "'");
    }
    std::string list;
    if (in.text("experiment", "epsilon_list", list)) {
        config.experiment.epsilon_list.clear();
        std::istringstream ls(list);
        std::string token;
        while (ls >> token) {
            try {
                const double eps = std::stod(token);
                if (!(eps > 0.0)) throw std::invalid_argument("nonpositive");
                config.experiment.epsilon_list.push_back(eps);
            } catch (const std::exception&) {
                errors.push_back("experiment.epsilon_list: entries must be positive numbers");
                break;
            }
        }
        if (config.experiment.epsilon_list.size() < 2)
            errors.push_back("experiment.epsilon_list: need at least two values");
    }
    if (in.number("experiment", "s_end", x)) {
        if (!(x > 0.0))
            errors.push_back("experiment.s_end: must be positive");
        else
            config.experiment.s_end = x;
    }
    if (in.number("experiment", "horizon", x)) {
        if (!(x > 0.0))
            errors.push_back("experiment.horizon: must be positive");
        else
            config.experiment.horizon = x;
    }
    in.boolean("experiment", "with_collision", config.experiment.with_collision);

    // [output], [tolerances]
    in.text("output", "dir", config.out_dir);
    for (const auto& key : known_keys().at("tolerances")) {
        if (in.number("tolerances", key, x)) {
            if (!(x > 0.0))
                errors.push_back("tolerances." + key + ": must be positive");
            else
                config.tolerances[key] = x;
        }
    }

    ParseResult result;
    result.errors = std::move(errors);
    if (result.errors.empty()) result.config = std::move(config);
    return result;
}

} // namespace

ParseResult parse_config(std::string_view text) {
    std::vector<std::string> errors;
    KeyMap values = read_lines(text, errors);
    return build_config(std::move(values), std::move(errors));
}

ParseResult parse_config_with_env(std::string_view text) {
    std::vector<std::string> errors;
    KeyMap values = read_lines(text, errors);
    apply_env(values);
    return build_config(std::move(values), std::move(errors));
}

ReferenceMeasure make_reference(const DiscretizationSpec& spec) {
    return build_reference(UniformDensity{spec.lower, spec.upper, spec.mass}, spec.n);
}

LagrangianState make_initial_state(const RunConfig& config, const ReferenceMeasure& ref) {
    const std::size_t n = ref.size();
    Rng rng(config.seed);
    LagrangianState state;

    const auto& init = config.initial;
    if (init.positions == "identity") {
        state.positions = ref.labels;
    } else if (init.positions == "equilibrium") {
        if (config.model.formulation != Formulation::Pressureless)
            throw std::invalid_argument(
                "initial.positions=equilibrium requires the pressureless model");
        state.positions = pressureless_equilibrium(ref);
    } else if (init.positions == "spread") {
        state.positions = ref.labels;
        double com = 0.0;
        for (std::size_t i = 0; i < n; ++i) com += ref.masses[i] * state.positions[i];
        com /= ref.total_mass;
        for (double& p : state.positions) p = com + init.position_scale * (p - com);
    } else { // random
        MonotoneStateOptions opts;
        const double gap = (ref.labels.back() - ref.labels.front()) /
                           static_cast<double>(n - 1);
        opts.gap_min = 0.25 * gap * init.position_scale;
        opts.gap_max = 1.75 * gap * init.position_scale;
        opts.velocity_scale = 0.0;
        state = random_monotone_state(rng, ref, opts);
    }

    state.velocities.assign(n, 0.0);
    if (init.velocities == "linear") {
        double com = 0.0;
        for (std::size_t i = 0; i < n; ++i) com += ref.masses[i] * state.positions[i];
        com /= ref.total_mass;
        for (std::size_t i = 0; i < n; ++i)
            state.velocities[i] = init.velocity_scale * (state.positions[i] - com);
    } else if (init.velocities == "sine") {
        const double lo = ref.labels.front();
        const double span = ref.labels.back() - lo;
        for (std::size_t i = 0; i < n; ++i)
            state.velocities[i] =
                init.velocity_scale * std::sin(2.0 * M_PI * (ref.labels[i] - lo) / span);
    } else if (init.velocities == "random") {
        state.velocities = random_smooth_velocities(rng, ref, init.velocity_scale);
    } else if (init.velocities == "approach") {
        state.velocities[n / 2 - 1] = init.velocity_scale;
        state.velocities[n / 2] = -init.velocity_scale;
    }
    state.time = 0.0;
    return state;
}

} // namespace epflow
