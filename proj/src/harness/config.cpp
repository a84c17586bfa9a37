#include "cepmc/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cepmc/errors.hpp"

namespace cepmc::harness {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(what + ": expected a number, got '" + text + "'");
    return v;
}

long long parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(what + ": expected an integer, got '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(what + ": expected an unsigned integer, got '" + text + "'");
    return v;
}

Vector parse_vector(const std::string& text, const std::string& what) {
    const auto parts = split_list(text, ',');
    Vector v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_double(parts[i], what);
    return v;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        cfg.sections_[section][key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

std::string KeyValueConfig::get_or(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    return get(section, key).value_or(fallback);
}

void KeyValueConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
}

std::string KeyValueConfig::to_string() const {
    std::ostringstream out;
    for (const auto& [section, keys] : sections_) {
        if (!section.empty()) out << "\n[" << section << "]\n";
        for (const auto& [k, v] : keys) out << k << " = " << v << "\n";
    }
    return out.str();
}

std::string to_string(Method method) {
    switch (method) {
        case Method::CePmc: return "cepmc";
        case Method::Ce: return "ce";
        case Method::LrPmc: return "lr_pmc";
        case Method::GrPmc: return "gr_pmc";
        case Method::PlainMc: return "plain_mc";
    }
    return "unknown";
}

Method parse_method(const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "cepmc") return Method::CePmc;
    if (t == "ce") return Method::Ce;
    if (t == "lr_pmc") return Method::LrPmc;
    if (t == "gr_pmc") return Method::GrPmc;
    if (t == "plain_mc") return Method::PlainMc;
    throw ConfigError("unknown method '" + text + "'");
}

std::vector<std::string> method_ids() { return {"cepmc", "ce", "lr_pmc", "gr_pmc", "plain_mc"}; }

OrbitalState parse_orbital_state(const std::string& text) {
    const Vector v = parse_vector(text, "orbital state");
    if (v.size() != 6) throw ConfigError("orbital state needs 6 components, got '" + text + "'");
    OrbitalState s;
    s.position = v.head<3>();
    s.velocity = v.tail<3>();
    return s;
}

std::string format_orbital_state(const OrbitalState& state) {
    std::string out;
    for (int i = 0; i < 3; ++i) out += (i ? "," : "") + format_double(state.position(i));
    for (int i = 0; i < 3; ++i) out += "," + format_double(state.velocity(i));
    return out;
}

namespace {

ConjunctionScenario parse_scenario(const KeyValueConfig& cfg) {
    ConjunctionScenario sc = default_conjunction_scenario();
    const std::string s = "scenario";
    if (auto v = cfg.get(s, "rogue_mean")) sc.rogue_mean = parse_orbital_state(*v);
    if (auto v = cfg.get(s, "rogue_pos_sigma")) sc.rogue_pos_sigma = parse_double(*v, "rogue_pos_sigma");
    if (auto v = cfg.get(s, "rogue_vel_sigma")) sc.rogue_vel_sigma = parse_double(*v, "rogue_vel_sigma");
    if (auto v = cfg.get(s, "assets")) {
        const auto parts = split_list(*v, ';');
        if (parts.size() != 2) throw ConfigError("assets: expected two ';'-separated states");
        sc.assets[0] = parse_orbital_state(parts[0]);
        sc.assets[1] = parse_orbital_state(parts[1]);
    }
    if (auto v = cfg.get(s, "horizon")) sc.horizon = parse_double(*v, "horizon");
    if (auto v = cfg.get(s, "miss_threshold")) sc.miss_threshold = parse_double(*v, "miss_threshold");
    if (auto v = cfg.get(s, "mu_grav")) sc.mu_grav = parse_double(*v, "mu_grav");
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sc;
}

}  // namespace

ExperimentPlan build_plan(KeyValueConfig config, const PlanOverrides& overrides) {
    if (overrides.replications) config.set("", "replications", std::to_string(*overrides.replications));
    if (overrides.seed) config.set("", "seed", std::to_string(*overrides.seed));
    if (overrides.output_dir) config.set("", "output_dir", *overrides.output_dir);

    ExperimentPlan plan;
    plan.experiment_id = config.get_or("", "experiment_id", "experiment");
    plan.master_seed = parse_u64(config.get_or("", "seed", "0"), "seed");
    plan.replications = static_cast<int>(parse_int(config.get_or("", "replications", "1"), "replications"));
    plan.output_dir = config.get_or("", "output_dir", "results");
    if (plan.replications < 1) throw ConfigError("replications must be at least 1");

    const auto problems = split_list(config.get_or("problem", "ids", ""));
    if (problems.empty()) throw ConfigError("[problem] ids is required");
    const auto methods = split_list(config.get_or("method", "ids", ""));
    if (methods.empty()) throw ConfigError("[method] ids is required");
    const auto rho_text = config.get("method", "rho");
    if (!rho_text) throw ConfigError("[method] rho must be set explicitly");
    const auto rhos = split_list(*rho_text);
    const auto dims = split_list(config.get_or("problem", "dims", "2"));

    ProblemParams base_params;
    const std::string form = lower(config.get_or("problem", "form", "squared"));
    if (form == "squared") base_params.form = LimitStateForm::Squared;
    else if (form == "linear") base_params.form = LimitStateForm::Linear;
    else throw ConfigError("[problem] form must be 'squared' or 'linear'");
    base_params.beta = parse_double(config.get_or("problem", "beta", "5"), "beta");

    RunConfig run;
    run.proposals = static_cast<int>(parse_int(config.get_or("method", "N", "25"), "N"));
    run.samples = parse_int(config.get_or("method", "K", "100"), "K");
    run.trials = static_cast<int>(parse_int(config.get_or("method", "T", "20"), "T"));
    const std::string sched = config.get_or("method", "cov_schedule_start", "auto");
    run.cov_schedule_start = sched == "auto" ? 0 : static_cast<int>(parse_int(sched, "cov_schedule_start"));
    const std::string fb = lower(config.get_or("method", "final_batch", "as_drawn"));
    if (fb == "as_drawn") run.final_batch = FinalBatch::AsDrawn;
    else if (fb == "fresh") run.final_batch = FinalBatch::Fresh;
    else throw ConfigError("[method] final_batch must be 'as_drawn' or 'fresh'");
    const int max_iterations = static_cast<int>(parse_int(config.get_or("method", "max_iterations", "100"), "max_iterations"));

    const std::string scheme = lower(config.get_or("init", "scheme", "standard_normal"));
    InitScheme init;
    if (scheme == "standard_normal") init = InitScheme::StandardNormal;
    else if (scheme == "latin_hypercube_pm") init = InitScheme::LatinHypercube;
    else if (scheme == "explicit") init = InitScheme::Explicit;
    else throw ConfigError("[init] scheme must be standard_normal, latin_hypercube_pm or explicit");
    const double init_sigma = parse_double(config.get_or("init", "sigma", "1"), "init sigma");
    if (!(init_sigma > 0.0)) throw ConfigError("[init] sigma must be positive");
    std::vector<Vector> explicit_means;
    if (init == InitScheme::Explicit) {
        for (const auto& m : split_list(config.get_or("init", "means", ""), ';'))
            explicit_means.push_back(parse_vector(m, "init means"));
        if (explicit_means.empty()) throw ConfigError("[init] means required for the explicit scheme");
    }

    const bool needs_scenario = std::find(problems.begin(), problems.end(), "conjunction") != problems.end();
    if (needs_scenario) base_params.scenario = parse_scenario(config);

    for (const auto& problem_id : problems) {
        const auto known = problem_ids();
        if (std::find(known.begin(), known.end(), problem_id) == known.end())
            throw ConfigError("unknown problem id '" + problem_id + "'");
        // Only S4 has a free dimension.
        const std::vector<std::string> problem_dims = problem_id == "s4" ? dims : std::vector<std::string>{"0"};
        for (const auto& dim_text : problem_dims) {
            ProblemParams params = base_params;
            if (problem_id == "s4") {
                params.dim = static_cast<int>(parse_int(dim_text, "dims"));
                if (params.dim < 1) throw ConfigError("dims entries must be at least 1");
            }
            const int problem_dim = problem_id == "s4" ? params.dim : (problem_id == "conjunction" ? 6 : 2);
            for (const auto& method_text : methods) {
                for (const auto& rho_item : rhos) {
                    ExperimentSpec spec;
                    spec.experiment_id = plan.experiment_id;
                    spec.problem_id = problem_id;
                    spec.problem_params = params;
                    spec.method = parse_method(method_text);
                    spec.run = run;
                    spec.run.rho = parse_double(rho_item, "rho");
                    spec.run.seed = plan.master_seed;
                    spec.max_iterations = max_iterations;
                    spec.replications = plan.replications;
                    spec.init = init;
                    spec.init_sigma = init_sigma;
                    spec.explicit_means = explicit_means;
                    try {
                        spec.run.validate();
                    } catch (const std::invalid_argument& e) {
                        throw ConfigError(e.what());
                    }
                    if (init == InitScheme::Explicit) {
                        if (static_cast<int>(explicit_means.size()) != run.proposals)
                            throw ConfigError("[init] means must list N vectors");
                        for (const auto& m : explicit_means)
                            if (m.size() != problem_dim)
                                throw ConfigError("[init] means dimension does not match problem " + problem_id);
                    }
                    plan.cells.push_back(std::move(spec));
                }
            }
        }
    }
    plan.source = std::move(config);
    return plan;
}

}  // namespace cepmc::harness
