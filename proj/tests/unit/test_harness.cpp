#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cepmc/errors.hpp"
#include "cepmc/harness/config.hpp"
#include "cepmc/harness/experiment.hpp"
#include "cepmc/harness/plot_data.hpp"

using namespace cepmc;
using namespace cepmc::harness;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> fields_of(const std::string& line) { return split_list(line, ','); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path work_dir(const std::string& name) {
    const fs::path dir = fs::path(CEPMC_TEST_WORK_DIR) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kSmallConfig = R"(
experiment_id = small
seed = 99
replications = 4

[problem]
ids = s3, s4
beta = 3
dims = 2

[method]
ids = cepmc, lr_pmc
N = 3
K = 100
T = 4
rho = 0.1
)";

}  // namespace

TEST_CASE("KeyValueConfig parsing") {
    const auto cfg = KeyValueConfig::parse("a = 1  # trailing\n# comment\n\n[Method]\nN = 25\nrho=0.1\n");
    CHECK(cfg.get("", "a").value() == "1");
    CHECK(cfg.get("method", "N").value() == "25");
    CHECK(cfg.get("method", "rho").value() == "0.1");
    CHECK_FALSE(cfg.get("method", "n").has_value());
    CHECK(cfg.get_or("init", "scheme", "x") == "x");
    CHECK_THROWS_AS(KeyValueConfig::parse("[broken\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/cfg"), ConfigError);
    const auto again = KeyValueConfig::parse(cfg.to_string());
    CHECK(again.to_string() == cfg.to_string());
}

TEST_CASE("build_plan errors") {
    auto base = KeyValueConfig::parse(kSmallConfig);
    CHECK_NOTHROW(build_plan(base));
    auto missing_rho = base;
    missing_rho = KeyValueConfig::parse("[problem]\nids=s1\n[method]\nids=cepmc\n");
    CHECK_THROWS_AS(build_plan(missing_rho), ConfigError);
    auto bad = base;
    bad.set("problem", "ids", "s9");
    CHECK_THROWS_AS(build_plan(bad), ConfigError);
    bad = base;
    bad.set("method", "ids", "magic");
    CHECK_THROWS_AS(build_plan(bad), ConfigError);
    bad = base;
    bad.set("method", "K", "ten");
    CHECK_THROWS_AS(build_plan(bad), ConfigError);
    bad = base;
    bad.set("method", "rho", "1.5");
    CHECK_THROWS_AS(build_plan(bad), ConfigError);
    bad = base;
    bad.set("init", "scheme", "sobol");
    CHECK_THROWS_AS(build_plan(bad), ConfigError);
}

TEST_CASE("build_plan applies overrides") {
    const auto plan = build_plan(KeyValueConfig::parse(kSmallConfig), {7, 123u, std::string("elsewhere")});
    CHECK(plan.replications == 7);
    CHECK(plan.master_seed == 123u);
    CHECK(plan.output_dir == "elsewhere");
    CHECK(plan.cells.size() == 4);
    for (const auto& c : plan.cells) CHECK(c.replications == 7);
    CHECK(plan.source.get("", "seed").value() == "123");
}

TEST_CASE("shipped experiment layouts") {
    const fs::path configs = fs::path(CEPMC_SOURCE_DIR) / "configs";
    const auto table = build_plan(KeyValueConfig::load((configs / "table1.cfg").string()));
    CHECK(table.cells.size() == 9);
    std::set<std::pair<std::string, std::string>> combos;
    for (const auto& c : table.cells) {
        combos.insert({c.problem_id, to_string(c.method)});
        CHECK(c.run.proposals == 25);
        CHECK(c.run.samples == 100);
        CHECK(c.run.trials == 20);
    }
    CHECK(combos.size() == 9);

    const auto fig2 = build_plan(KeyValueConfig::load((configs / "fig2_dimension_sweep.cfg").string()));
    CHECK(fig2.cells.size() == 21);
    for (const auto& c : fig2.cells) CHECK(c.init == InitScheme::LatinHypercube);

    const auto mc = build_plan(KeyValueConfig::load((configs / "conjunction_mc.cfg").string()));
    REQUIRE(mc.cells.size() == 1);
    const auto cells = run_plan(mc, 1);
    const auto rows = lines_of(replications_csv(cells));
    REQUIRE(rows.size() == 2);
    const auto f = fields_of(rows[1]);
    CHECK(f[1] == "plain_mc");
    CHECK(f[2] == "conjunction");
    CHECK_FALSE(f[10].empty());
    CHECK(std::stod(f[10]) > 0.0);
}

TEST_CASE("latin hypercube layout") {
    Rng rng(1);
    const auto pts = latin_hypercube_init(4, 2, rng);
    REQUIRE(pts.size() == 4);
    for (int j = 0; j < 2; ++j) {
        std::multiset<double> col;
        for (const auto& p : pts) col.insert(p(j));
        CHECK(col == std::multiset<double>{-0.75, -0.25, 0.25, 0.75});
    }
    const auto single = latin_hypercube_init(1, 3, rng);
    CHECK(single.front().isZero());
    CHECK_THROWS_AS(latin_hypercube_init(0, 2, rng), std::invalid_argument);
}

TEST_CASE("replication seeds do not collide") {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(1u << 21);
    for (std::uint64_t r = 0; r < 1000000; ++r) seen.insert(derive_seed(20240601u, r));
    CHECK(seen.size() == 1000000);
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("run_plan is deterministic and thread-count independent") {
    const auto plan = build_plan(KeyValueConfig::parse(kSmallConfig));
    const auto one = run_plan(plan, 1);
    const auto again = run_plan(plan, 1);
    const auto threaded = run_plan(plan, 3);
    CHECK(replications_csv(one) == replications_csv(again));
    CHECK(replications_csv(one) == replications_csv(threaded));
    CHECK(summary_csv(one) == summary_csv(threaded));
    CHECK(final_proposals_csv(one) == final_proposals_csv(threaded));

    // Common random numbers: replication r has the same seed in every cell.
    for (const auto& cell : one)
        for (std::size_t r = 0; r < cell.reps.size(); ++r)
            CHECK(cell.reps[r].seed == one.front().reps[r].seed);
}

TEST_CASE("summary RRMSE matches the replication column") {
    const auto plan = build_plan(KeyValueConfig::parse(kSmallConfig));
    const auto cells = run_plan(plan, 1);
    const auto reps = lines_of(replications_csv(cells));
    const auto summary = lines_of(summary_csv(cells));
    REQUIRE(summary.size() == cells.size() + 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> estimates;
        double reference = 0.0;
        for (std::size_t i = 1; i < reps.size(); ++i) {
            const auto f = fields_of(reps[i]);
            if (f[2] != cells[c].spec.problem_id || f[1] != to_string(cells[c].spec.method)) continue;
            estimates.push_back(std::stod(f[10]));
            reference = std::stod(f[12]);
        }
        REQUIRE(estimates.size() == 4);
        const auto s = fields_of(summary[c + 1]);
        CHECK(std::stod(s[12]) == doctest::Approx(rrmse(estimates, reference)).epsilon(1e-12));
        CHECK(std::stoi(s[9]) == 0);
    }
}

TEST_CASE("failed replications are recorded, not thrown") {
    auto cfg = KeyValueConfig::parse(kSmallConfig);
    cfg.set("problem", "ids", "s4");
    cfg.set("problem", "beta", "40");
    cfg.set("method", "ids", "ce");
    cfg.set("method", "max_iterations", "2");
    const auto cells = run_plan(build_plan(cfg), 1);
    const auto s = summarize(cells.front());
    CHECK(s.failures == 4);
    CHECK(cells.front().reps.front().error.rfind("MaxIterationsExceeded", 0) == 0);
}

TEST_CASE("write_outputs produces byte-identical deterministic files") {
    auto plan = build_plan(KeyValueConfig::parse(kSmallConfig));
    const fs::path a = work_dir("outputs_a"), b = work_dir("outputs_b");
    plan.output_dir = a.string();
    write_outputs(plan, run_plan(plan, 1));
    plan.output_dir = b.string();
    write_outputs(plan, run_plan(plan, 2));
    for (const char* name : {"replications.csv", "summary.csv", "final_proposals.csv"})
        CHECK(slurp(a / name) == slurp(b / name));
    CHECK(fs::exists(a / "timings.csv"));
    CHECK(fs::exists(a / "run.cfg"));
}

TEST_CASE("contour grid") {
    const auto p = make_s3();
    const std::string csv = contour_csv(p, {p.base}, PlotOptions{});
    const auto rows = lines_of(csv);
    REQUIRE(rows.size() == 141 * 141 + 1);
    for (std::size_t i = 1; i < rows.size(); i += 97) {
        const auto f = fields_of(rows[i]);
        REQUIRE(f.size() == 6);
        for (const auto& v : f) CHECK(std::isfinite(std::stod(v)));
    }
    CHECK_THROWS_AS(contour_csv(make_s4(3.0, 3), {}, PlotOptions{}), std::invalid_argument);
}

TEST_CASE("plot-data from an empty directory writes nothing") {
    const fs::path from = work_dir("plot_empty"), out = work_dir("plot_empty_out");
    CHECK(emit_plot_data(from.string(), out.string()).empty());
    CHECK(fs::is_empty(out));
}

TEST_CASE("plot-data for a conjunction run") {
    const fs::path run_dir = work_dir("plot_conj"), out = work_dir("plot_conj_out");
    auto cfg = KeyValueConfig::parse(
        "experiment_id = conj\nseed = 5\nreplications = 1\n[problem]\nids = conjunction\n"
        "[method]\nids = cepmc\nN = 16\nK = 30\nT = 2\nrho = 0.1\n");
    cfg.set("", "output_dir", run_dir.string());
    const auto plan = build_plan(cfg);
    write_outputs(plan, run_plan(plan, 1));
    PlotOptions opts;
    opts.mc_traces = 100;
    const auto files = emit_plot_data(run_dir.string(), out.string(), opts);
    CHECK(files.size() == 3);
    bool saw_proposals = false;
    for (const auto& f : files) {
        const std::string name = fs::path(f).filename().string();
        const auto rows = lines_of(slurp(f));
        if (name.rfind("traces_mc_", 0) == 0) {
            CHECK(rows.size() == 101);
        } else if (name.rfind("traces_assets_", 0) == 0) {
            CHECK(rows.size() == 3);
        } else if (name.rfind("traces_", 0) == 0) {
            saw_proposals = true;
            CHECK(rows.size() == 16 * 50 + 1);
            CHECK(fields_of(rows.front()).size() == fields_of(rows.back()).size());
        }
    }
    CHECK(saw_proposals);
}
