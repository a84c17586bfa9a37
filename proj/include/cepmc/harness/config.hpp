#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cepmc/population.hpp"
#include "cepmc/problems.hpp"

namespace cepmc::harness {

/// Sectioned `key = value` text. Keys before the first `[section]` header
/// live in the "" section. `#` starts a comment.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig load(const std::string& path);

    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    /// Canonical text: sections in sorted order, keys sorted within.
    std::string to_string() const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class Method { CePmc, Ce, LrPmc, GrPmc, PlainMc };

std::string to_string(Method method);
Method parse_method(const std::string& text);
std::vector<std::string> method_ids();

enum class InitScheme { StandardNormal, LatinHypercube, Explicit };

/// One grid cell of an experiment: a single problem, method and rho, run
/// for `replications` seeds.
struct ExperimentSpec {
    std::string experiment_id;
    std::string problem_id;
    ProblemParams problem_params;
    Method method = Method::CePmc;
    RunConfig run;
    int max_iterations = 100;  // multilevel CE only
    int replications = 1;
    InitScheme init = InitScheme::StandardNormal;
    double init_sigma = 1.0;
    std::vector<Vector> explicit_means;
};

struct ExperimentPlan {
    std::string experiment_id;
    std::uint64_t master_seed = 0;
    int replications = 1;
    std::string output_dir = "results";
    std::vector<ExperimentSpec> cells;
    KeyValueConfig source;  // effective configuration, overrides applied
};

struct PlanOverrides {
    std::optional<int> replications;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

/// Expands problems x dims x methods x rhos into cells. Throws ConfigError
/// on any malformed or inconsistent entry.
ExperimentPlan build_plan(KeyValueConfig config, const PlanOverrides& overrides = {});

/// Comma-separated list, whitespace trimmed.
std::vector<std::string> split_list(const std::string& text, char sep = ',');

/// "x,y,z,vx,vy,vz" in SI units.
OrbitalState parse_orbital_state(const std::string& text);
std::string format_orbital_state(const OrbitalState& state);

/// Shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace cepmc::harness
