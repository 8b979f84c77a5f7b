#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "json.hpp"
#include "wealthnet/errors.hpp"
#include "wealthnet/runner.hpp"

using namespace wealthnet;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wealthnet_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

ExperimentConfig small_mixed(const fs::path& out) {
    ExperimentConfig c;
    c.topology = "mixed";
    c.n = 60;
    c.m_core = 15;
    c.steps = 400;
    c.burn_in = 200;
    c.snapshot_every = 50;
    c.ensemble = 3;
    c.seed = 9;
    c.out = out.string();
    return c;
}

}  // namespace

TEST_CASE("config round trip") {
    ExperimentConfig c = preset("fig4");
    c.dynamics.coupling = Coupling::degree_normalized;
    c.p_rewire = 0.25;
    const json j = to_json(c);
    CHECK(j["version"] == kConfigVersion);
    CHECK(to_json(config_from_json(j)) == j);
    CHECK_FALSE(j.contains("threads"));
}

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS(config_from_json(json{{"version", 1}, {"nodes", 5}}), ParameterError);
    CHECK_THROWS_AS(config_from_json(json{{"version", 2}}), ParameterError);
    CHECK_THROWS_AS(config_from_json(json{{"n", 5}}), ParameterError);
    CHECK_THROWS_AS(config_from_json(json{{"version", 1}, {"n", "five"}}), ParameterError);
    CHECK_THROWS_AS(config_from_json(json{{"version", 1}, {"coupling", "bogus"}}), ParameterError);
    CHECK_THROWS_AS(config_from_json(json::array()), ParameterError);
    const auto partial = config_from_json(json{{"version", 1}, {"n", 77}, {"j", 0.2}});
    CHECK(partial.n == 77);
    CHECK(partial.dynamics.J == 0.2);
    CHECK(partial.topology == ExperimentConfig{}.topology);

    const auto dir = fresh_dir("config");
    write_text(dir / "bad.json", "{ not json");
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ParameterError);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);
    write_text(dir / "ok.json", R"({"version": 1, "topology": "ring", "q": 3})");
    const auto ring = load_config(dir / "ok.json");
    CHECK(ring.topology == "ring");
    CHECK(ring.q == 3);
}

TEST_CASE("presets") {
    const auto f2 = preset("fig2");
    CHECK(f2.topology == "mixed");
    CHECK(f2.n == 5000);
    CHECK(f2.m_over_n == std::vector<double>{0.5, 0.25, 0.125, 0.0625});
    const auto f4 = preset("fig4");
    CHECK(f4.topology == "octopus");
    CHECK(f4.n == 3000);
    CHECK(f4.m_over_n.size() == 5);
    for (const auto& name : preset_names()) {
        const auto p = preset(name);
        CHECK(p.dynamics.J == 0.05);
        CHECK(p.dynamics.sigma2 == 0.05);
        CHECK(p.dynamics.drift == 1.0);
        CHECK(p.dynamics.dt == 0.01);
        CHECK_NOTHROW(p.validate());
    }
    CHECK_THROWS_AS(preset("fig3"), ParameterError);
}

TEST_CASE("validation") {
    ExperimentConfig c;
    c.topology = "torus";
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = ExperimentConfig{};
    c.burn_in = c.steps + 1;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = ExperimentConfig{};
    c.m_over_n = {0.0};
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = ExperimentConfig{};
    c.topology = "octopus";
    c.m_core = 0;
    CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("read_samples") {
    const auto dir = fresh_dir("samples");
    write_text(dir / "plain.txt", "1.5\n2\n\n3e-1\n");
    CHECK(read_samples(dir / "plain.txt") == std::vector<double>{1.5, 2.0, 0.3});
    write_text(dir / "table.csv", "t,vertex,w,w_norm\n0,0,5,0.5\n0,1,15,1.5\n");
    CHECK(read_samples(dir / "table.csv", "w_norm") == std::vector<double>{0.5, 1.5});
    CHECK_THROWS_AS(read_samples(dir / "table.csv", "wealth"), ParameterError);
    write_text(dir / "neg.txt", "1\n-2\n");
    CHECK_THROWS_AS(read_samples(dir / "neg.txt"), DomainError);
    write_text(dir / "word.txt", "1\nabc\n");
    CHECK_THROWS_AS(read_samples(dir / "word.txt"), ParameterError);
    write_text(dir / "empty.txt", "");
    CHECK_THROWS_AS(read_samples(dir / "empty.txt"), InsufficientDataError);
    CHECK_THROWS_AS(read_samples(dir / "absent.txt"), IoError);
}

TEST_CASE("net writes a readable edge list") {
    const auto dir = fresh_dir("net");
    ExperimentConfig c;
    c.topology = "mixed";
    c.n = 100;
    c.m_core = 10;
    const auto s = cmd_net(c, dir / "edges.txt");
    CHECK(s.edges == 45);
    CHECK(s.k_max == 9);
    CHECK(s.k_min == 0);
    CHECK(read_edge_list(dir / "edges.txt") == prepare_run(c, 0).net);
}

TEST_CASE("simulate writes the documented outputs") {
    const auto dir = fresh_dir("simulate");
    const auto c = small_mixed(dir / "a");
    const auto s = cmd_simulate(c);
    CHECK(s.runs == 3);
    CHECK(s.pooled_samples == 3 * 4 * 60);
    CHECK(s.stationarity.ks.has_value());
    for (const char* f : {"config.resolved.json", "pool_w_norm.txt", "summary.json", "correlations.csv",
                          "snapshots/run_000.csv", "snapshots/run_002.final.json"}) {
        CHECK(fs::exists(dir / "a" / f));
    }
    const auto resolved = load_config(dir / "a" / "config.resolved.json");
    CHECK(to_json(resolved) == to_json(c));
    const auto pool = read_samples(dir / "a" / "pool_w_norm.txt");
    CHECK(pool.size() == s.pooled_samples);
}

TEST_CASE("simulate output does not depend on the thread count") {
    const auto dir = fresh_dir("threads");
    auto c1 = small_mixed(dir / "one");
    auto c3 = small_mixed(dir / "three");
    c3.threads = 3;
    cmd_simulate(c1);
    cmd_simulate(c3);
    for (const char* f : {"pool_w_norm.txt", "summary.json", "correlations.csv", "snapshots/run_000.csv",
                          "snapshots/run_001.csv", "snapshots/run_002.csv", "snapshots/run_001.final.json",
                          "fits/eccdf.csv"}) {
        CHECK_MESSAGE(slurp(dir / "one" / f) == slurp(dir / "three" / f), f);
    }
    auto fit1 = json::parse(slurp(dir / "one" / "fits" / "fit.json"));
    auto fit3 = json::parse(slurp(dir / "three" / "fits" / "fit.json"));
    fit1.erase("samples");
    fit3.erase("samples");
    CHECK(fit1 == fit3);
}

TEST_CASE("fit modes") {
    const auto dir = fresh_dir("fit");
    std::ostringstream text;
    for (int i = 1; i <= 400; ++i) text << 1.0 + 0.01 * i * i << '\n';
    write_text(dir / "s.txt", text.str());
    FitRequest req;
    req.samples = dir / "s.txt";
    req.out_dir = dir / "out";
    req.mode = FitMode::gibrat;
    const auto g = cmd_fit(req);
    CHECK(g["mode"] == "gibrat");
    CHECK(g.contains("beta_hat"));
    CHECK(g["n"] == 400);
    req.mode = FitMode::pareto;
    req.w_min = 2.0;
    CHECK(cmd_fit(req)["w_star_hat"] == 2.0);
    req.mode = FitMode::auto_;
    const auto a = cmd_fit(req);
    CHECK(a.contains("slope_gap"));
    CHECK(a.contains("pareto"));
    CHECK(a.contains("gibrat"));
    CHECK(fs::exists(dir / "out" / "fit.json"));
    const auto ecc = slurp(dir / "out" / "eccdf.csv");
    CHECK(ecc.rfind("w,p_greater\n", 0) == 0);
    CHECK_THROWS_AS(parse_fit_mode("spline"), ParameterError);
}

TEST_CASE("sweep-correlations refuses non-core families") {
    ExperimentConfig c;
    c.topology = "ring";
    c.m_over_n = {0.5};
    CHECK_THROWS_AS(cmd_sweep_correlations(c), ParameterError);
    c.topology = "octopus";
    c.m_over_n.clear();
    CHECK_THROWS_AS(cmd_sweep_correlations(c), ParameterError);
    CHECK_THROWS_AS(cmd_figure("fig9", preset("fig2")), ParameterError);
}
