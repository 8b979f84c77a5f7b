#include "wealthnet/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "format.hpp"
#include "wealthnet/errors.hpp"
#include "wealthnet/inference.hpp"
#include "wealthnet/parallel.hpp"

namespace wealthnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kTopologies{"complete", "erdos_renyi", "ring",  "watts_strogatz",
                                           "barabasi_albert", "mixed", "octopus"};

bool is_core_family(const std::string& topology) {
    return topology == "mixed" || topology == "octopus";
}

std::string coupling_name(Coupling c) {
    return c == Coupling::uniform_over_n ? "uniform_over_n" : "degree_normalized";
}

Coupling parse_coupling(const std::string& s) {
    if (s == "uniform_over_n") return Coupling::uniform_over_n;
    if (s == "degree_normalized") return Coupling::degree_normalized;
    throw ParameterError("config: unknown coupling '" + s +
                         "' (expected uniform_over_n or degree_normalized)");
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string run_name(std::size_t r) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "run_%03zu", r);
    return buf;
}

std::string ratio_label(double r) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r);
    return "m_over_n_" + std::string(buf, ptr);
}

}  // namespace

// --- config ---------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (std::find(kTopologies.begin(), kTopologies.end(), topology) == kTopologies.end()) {
        throw ParameterError("config: unknown topology '" + topology + "'");
    }
    ::wealthnet::validate(topology_spec(0));
    dynamics.validate();
    if (burn_in > steps) {
        throw ParameterError("config: burn_in (" + std::to_string(burn_in) + ") exceeds steps (" +
                             std::to_string(steps) + ")");
    }
    if (ensemble < 1) throw ParameterError("config: ensemble must be at least 1");
    for (double r : m_over_n) {
        if (!(r > 0.0 && r <= 1.0)) throw ParameterError("config: m_over_n values must lie in (0,1]");
    }
    if (out.empty()) throw ParameterError("config: out must name a directory");
}

TopologySpec ExperimentConfig::topology_spec(std::uint64_t topology_seed) const {
    TopologySpec spec;
    spec.seed = topology_seed;
    if (topology == "complete") spec.model = topology::Complete{n};
    else if (topology == "erdos_renyi") spec.model = topology::ErdosRenyi{n, p_link};
    else if (topology == "ring") spec.model = topology::RingLattice{n, q};
    else if (topology == "watts_strogatz") spec.model = topology::WattsStrogatz{n, q, p_rewire};
    else if (topology == "barabasi_albert") spec.model = topology::BarabasiAlbert{n, m0, m};
    else if (topology == "mixed") spec.model = topology::MixedCore{n, m_core};
    else if (topology == "octopus") spec.model = topology::Octopus{n, m_core, p_core};
    else throw ParameterError("config: unknown topology '" + topology + "'");
    return spec;
}

namespace {

ExperimentConfig figure_base() {
    ExperimentConfig c;
    c.dynamics.drift = 1.0;
    c.dynamics.sigma2 = 0.05;
    c.dynamics.J = 0.05;
    c.dynamics.dt = 0.01;
    c.dynamics.coupling = Coupling::uniform_over_n;
    c.burn_in = 200000;
    c.steps = 300000;
    c.snapshot_every = 10000;
    c.ensemble = 10;
    c.seed = 1;
    return c;
}

}  // namespace

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c = figure_base();
    if (name == "fig2") {
        c.topology = "mixed";
        c.n = 5000;
        c.m_over_n = {0.5, 0.25, 0.125, 0.0625};
        c.out = "fig2";
    } else if (name == "fig4") {
        c.topology = "octopus";
        c.n = 3000;
        c.m_over_n = {1.0, 0.5, 0.25, 0.125, 0.0625};
        c.out = "fig4";
    } else if (name == "fig5") {
        c.topology = "octopus";
        c.n = 3000;
        c.m_over_n = {1.0, 0.5, 0.25, 0.125, 0.0625};
        c.steps = c.burn_in;
        c.snapshot_every = 0;
        c.out = "fig5";
    } else {
        throw ParameterError("unknown preset '" + name + "' (expected fig2, fig4 or fig5)");
    }
    c.m_core = static_cast<std::size_t>(std::lround(static_cast<double>(c.n) * c.m_over_n.front()));
    return c;
}

std::vector<std::string> preset_names() { return {"fig2", "fig4", "fig5"}; }

json to_json(const ExperimentConfig& c) {
    json j;
    j["version"] = kConfigVersion;
    j["topology"] = c.topology;
    j["n"] = c.n;
    j["m_core"] = c.m_core;
    j["p_core"] = c.p_core;
    j["p_link"] = c.p_link;
    j["q"] = c.q;
    j["p_rewire"] = c.p_rewire;
    j["m0"] = c.m0;
    j["m"] = c.m;
    j["coupling"] = coupling_name(c.dynamics.coupling);
    j["j"] = c.dynamics.J;
    j["sigma2"] = c.dynamics.sigma2;
    j["m_drift"] = c.dynamics.drift;
    j["dt"] = c.dynamics.dt;
    j["steps"] = c.steps;
    j["burn_in"] = c.burn_in;
    j["snapshot_every"] = c.snapshot_every;
    j["ensemble"] = c.ensemble;
    j["seed"] = c.seed;
    j["m_over_n"] = c.m_over_n;
    j["out"] = c.out;
    return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
    if (!j.is_object()) throw ParameterError("config: top level must be a JSON object");
    if (!j.contains("version")) throw ParameterError("config: missing version field");
    static const std::set<std::string> known{
        "version", "topology", "n",     "m_core",    "p_core",  "p_link",   "q",
        "p_rewire", "m0",      "m",     "coupling",  "j",       "sigma2",   "m_drift",
        "dt",      "steps",    "burn_in", "snapshot_every", "ensemble", "seed", "m_over_n", "out"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ParameterError("config: unknown key '" + key + "'");
    }
    try {
        if (j.at("version").get<int>() != kConfigVersion) {
            throw ParameterError("config: unsupported version " + j.at("version").dump() +
                                 " (expected " + std::to_string(kConfigVersion) + ")");
        }
        auto take = [&j](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        take("topology", c.topology);
        take("n", c.n);
        take("m_core", c.m_core);
        take("p_core", c.p_core);
        take("p_link", c.p_link);
        take("q", c.q);
        take("p_rewire", c.p_rewire);
        take("m0", c.m0);
        take("m", c.m);
        if (j.contains("coupling")) c.dynamics.coupling = parse_coupling(j.at("coupling").get<std::string>());
        take("j", c.dynamics.J);
        take("sigma2", c.dynamics.sigma2);
        take("m_drift", c.dynamics.drift);
        take("dt", c.dynamics.dt);
        take("steps", c.steps);
        take("burn_in", c.burn_in);
        take("snapshot_every", c.snapshot_every);
        take("ensemble", c.ensemble);
        take("seed", c.seed);
        take("m_over_n", c.m_over_n);
        take("out", c.out);
    } catch (const json::exception& e) {
        throw ParameterError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const fs::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParameterError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j, std::move(base));
}

// --- runs -----------------------------------------------------------------

RunSetup prepare_run(const ExperimentConfig& config, std::uint64_t run) {
    const RunSeeds seeds = run_seeds(config.seed, run);
    return {build(config.topology_spec(seeds.topology)), seeds.noise};
}

NetSummary summarize_network(const Network& net) {
    NetSummary s{net.vertex_count(), net.edge_count(), 0, 0, 0.0};
    const auto k = net.degrees();
    if (!k.empty()) {
        s.k_min = *std::min_element(k.begin(), k.end());
        s.k_max = *std::max_element(k.begin(), k.end());
        s.k_mean = 2.0 * static_cast<double>(net.edge_count()) / static_cast<double>(k.size());
    }
    return s;
}

NetSummary cmd_net(const ExperimentConfig& config, const fs::path& out_path) {
    config.validate();
    const Network net = prepare_run(config, 0).net;
    if (out_path.has_parent_path()) make_dirs(out_path.parent_path());
    write_edge_list(out_path, net);
    return summarize_network(net);
}

namespace {

json final_state_json(const WealthState& s) {
    return {{"step", s.step}, {"t", s.t}, {"log2_unit", s.log2_unit}, {"w", s.w}, {"w_norm", s.normalized()}};
}

void write_pool(const fs::path& path, std::span<const double> pool) {
    auto out = open_out(path);
    for (double x : pool) {
        detail::put_double(out, x);
        out << '\n';
    }
    finish(out, path);
}

void write_eccdf(const fs::path& path, std::span<const double> samples) {
    auto out = open_out(path);
    out << "w,p_greater\n";
    for (const auto& p : eccdf(samples)) {
        detail::put_double(out, p.w);
        out << ',';
        detail::put_double(out, p.p_greater);
        out << '\n';
    }
    finish(out, path);
}

std::optional<double> core_fraction_of(const ExperimentConfig& c) {
    if (!is_core_family(c.topology)) return std::nullopt;
    return static_cast<double>(c.m_core) / static_cast<double>(c.n);
}

}  // namespace

SimulateSummary cmd_simulate(const ExperimentConfig& config) {
    config.validate();
    const fs::path dir = config.out;
    make_dirs(dir / "snapshots");
    make_dirs(dir / "fits");
    write_json(dir / "config.resolved.json", to_json(config));

    struct RunOutput {
        std::vector<std::vector<double>> snapshots;
        WealthState final_state;
        std::optional<double> r_degree, r_wealth, r_degree_wealth;
    };
    std::vector<RunOutput> runs(config.ensemble);
    parallel_for(config.ensemble, config.threads, [&](std::size_t r) {
        RunSetup setup = prepare_run(config, r);
        SimulationOptions options;
        options.steps = config.steps;
        options.burn_in = config.burn_in;
        options.snapshot_every = config.snapshot_every;
        options.seed = setup.noise_seed;
        SimulationResult result = simulate(setup.net, config.dynamics, options);

        const fs::path csv = dir / "snapshots" / (run_name(r) + ".csv");
        auto out = open_out(csv);
        write_snapshots_csv(out, result.snapshots);
        finish(out, csv);
        write_json(dir / "snapshots" / (run_name(r) + ".final.json"), final_state_json(result.final_state));

        RunOutput& o = runs[r];
        for (auto& s : result.snapshots) o.snapshots.push_back(std::move(s.w_norm));
        if (setup.net.edge_count() > 0) {
            o.r_degree = r_degree(setup.net);
            o.r_wealth = r_wealth(setup.net, result.final_state);
            o.r_degree_wealth = r_degree_wealth(setup.net, result.final_state);
        }
        o.final_state = std::move(result.final_state);
    });

    std::vector<double> pool, early, late;
    for (const auto& o : runs) {
        if (o.snapshots.empty()) {
            const auto w = o.final_state.normalized();
            pool.insert(pool.end(), w.begin(), w.end());
            continue;
        }
        const std::size_t half = o.snapshots.size() / 2;
        for (std::size_t s = 0; s < o.snapshots.size(); ++s) {
            const auto& w = o.snapshots[s];
            pool.insert(pool.end(), w.begin(), w.end());
            if (o.snapshots.size() < 2) continue;
            auto& side = s < half ? early : late;
            side.insert(side.end(), w.begin(), w.end());
        }
    }
    const fs::path pool_path = dir / "pool_w_norm.txt";
    write_pool(pool_path, pool);

    SimulateSummary summary{config.ensemble, pool.size(), {std::nullopt, true}, std::nullopt};
    if (!early.empty() && !late.empty()) {
        summary.stationarity.ks = ks_two_sample(early, late);
        summary.stationarity.passed = *summary.stationarity.ks < kStationarityKs;
    }

    const auto cf = core_fraction_of(config);
    FitRequest fit;
    fit.samples = pool_path;
    fit.mode = cf ? FitMode::mixture : FitMode::auto_;
    fit.core_fraction = cf;
    fit.out_dir = dir / "fits";
    try {
        cmd_fit(fit);
    } catch (const InsufficientDataError& e) {
        summary.fit_error = e.what();
    } catch (const DomainError& e) {
        summary.fit_error = e.what();
    }

    if (cf) {
        std::vector<std::optional<double>> d, w, dw;
        for (const auto& o : runs) {
            d.push_back(o.r_degree);
            w.push_back(o.r_wealth);
            dw.push_back(o.r_degree_wealth);
        }
        const CorrelationReport row{*cf, summarize(d), summarize(w), summarize(dw), config.ensemble};
        const fs::path csv = dir / "correlations.csv";
        auto out = open_out(csv);
        write_correlations_csv(out, std::span(&row, 1));
        finish(out, csv);
    }

    json s{{"runs", summary.runs}, {"pooled_samples", summary.pooled_samples}};
    s["stationarity_ks"] = summary.stationarity.ks ? json(*summary.stationarity.ks) : json(nullptr);
    s["stationarity_passed"] = summary.stationarity.passed;
    s["fit_error"] = summary.fit_error ? json(*summary.fit_error) : json(nullptr);
    json finals = json::array();
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const auto& f = runs[r].final_state;
        finals.push_back({{"run", r}, {"step", f.step}, {"t", f.t}, {"log2_unit", f.log2_unit}});
    }
    s["final"] = finals;
    write_json(dir / "summary.json", s);
    return summary;
}

// --- fitting --------------------------------------------------------------

FitMode parse_fit_mode(const std::string& s) {
    if (s == "pareto") return FitMode::pareto;
    if (s == "gibrat") return FitMode::gibrat;
    if (s == "mixture") return FitMode::mixture;
    if (s == "auto") return FitMode::auto_;
    throw ParameterError("fit: unknown mode '" + s + "' (expected pareto, gibrat, mixture or auto)");
}

namespace {

double parse_sample(std::string_view token, const fs::path& path, std::size_t line) {
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r')) {
        token.remove_suffix(1);
    }
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ParameterError(path.string() + ":" + std::to_string(line) + ": not a number: '" +
                             std::string(token) + "'");
    }
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(path.string() + ":" + std::to_string(line) + ": sample must be positive and finite");
    }
    return x;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

}  // namespace

std::vector<double> read_samples(const fs::path& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open samples " + path.string());
    std::vector<double> samples;
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> index;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (column.empty()) {
            samples.push_back(parse_sample(line, path, line_no));
            continue;
        }
        const auto fields = split_commas(line);
        if (!index) {
            const auto it = std::find(fields.begin(), fields.end(), column);
            if (it == fields.end()) {
                throw ParameterError(path.string() + ": no column named '" + column + "'");
            }
            index = static_cast<std::size_t>(it - fields.begin());
            continue;
        }
        if (*index >= fields.size()) {
            throw ParameterError(path.string() + ":" + std::to_string(line_no) + ": missing column '" + column + "'");
        }
        samples.push_back(parse_sample(fields[*index], path, line_no));
    }
    if (in.bad()) throw IoError("read failed for " + path.string());
    if (samples.empty()) throw InsufficientDataError("no samples in " + path.string());
    return samples;
}

json cmd_fit(const FitRequest& request) {
    const auto samples = read_samples(request.samples, request.column);
    json report;
    switch (request.mode) {
        case FitMode::pareto: {
            const ParetoFit fit = request.w_min ? fit_pareto_tail(samples, *request.w_min)
                                                : select_crossover(samples);
            report = to_json(fit);
            report["mode"] = "pareto";
            break;
        }
        case FitMode::gibrat:
            report = to_json(fit_gibrat(samples, request.upper_cut));
            report["mode"] = "gibrat";
            break;
        case FitMode::mixture:
            report = to_json(fit_mixture(samples, request.core_fraction));
            report["mode"] = "mixture";
            break;
        case FitMode::auto_: {
            report = to_json(fit_mixture(samples, request.core_fraction));
            report["mode"] = "auto";
            report["slope_gap"] = std::abs(report["slope_above"].get<double>() -
                                           report["slope_below"].get<double>());
            report["pareto"] = to_json(select_crossover(samples));
            report["gibrat"] = to_json(fit_gibrat(samples));
            break;
        }
    }
    report["n"] = samples.size();
    report["samples"] = request.samples.string();
    const fs::path dir = request.out_dir.empty() ? fs::path(".") : request.out_dir;
    make_dirs(dir);
    write_json(dir / "fit.json", report);
    write_eccdf(dir / "eccdf.csv", samples);
    return report;
}

// --- sweeps and figures ---------------------------------------------------

std::vector<CorrelationReport> cmd_sweep_correlations(const ExperimentConfig& requested) {
    if (!is_core_family(requested.topology)) {
        throw ParameterError("sweep-correlations: topology must be octopus or mixed, got '" +
                             requested.topology + "'");
    }
    if (requested.m_over_n.empty()) throw ParameterError("sweep-correlations: m_over_n list is empty");
    ExperimentConfig config = requested;
    config.m_core = static_cast<std::size_t>(std::lround(static_cast<double>(config.n) * config.m_over_n.front()));
    config.validate();
    SweepConfig sweep;
    sweep.family = config.topology == "octopus" ? SweepFamily::octopus : SweepFamily::mixed;
    sweep.n = config.n;
    sweep.m_over_n = config.m_over_n;
    sweep.p_core = config.p_core;
    sweep.dynamics = config.dynamics;
    sweep.steps = config.steps;
    sweep.ensemble = config.ensemble;
    sweep.seed = config.seed;
    sweep.threads = config.threads;
    sweep.validate();

    const fs::path dir = config.out;
    make_dirs(dir);
    write_json(dir / "config.resolved.json", to_json(config));
    const auto reports = correlation_sweep(sweep);
    {
        const fs::path csv = dir / "correlations.csv";
        auto out = open_out(csv);
        write_correlations_csv(out, reports);
        finish(out, csv);
    }
    {
        const fs::path csv = dir / "correlations_se.csv";
        auto out = open_out(csv);
        write_correlation_errors_csv(out, reports);
        finish(out, csv);
    }
    return reports;
}

void cmd_figure(const std::string& name, const ExperimentConfig& config) {
    if (name == "fig5") {
        cmd_sweep_correlations(config);
        return;
    }
    if (name != "fig2" && name != "fig4") {
        throw ParameterError("figure: unknown figure '" + name + "' (expected fig2, fig4 or fig5)");
    }
    if (config.m_over_n.empty()) throw ParameterError("figure: m_over_n list is empty");
    for (double ratio : config.m_over_n) {
        ExperimentConfig sub = config;
        sub.m_core = static_cast<std::size_t>(std::lround(static_cast<double>(config.n) * ratio));
        sub.validate();
    }
    const fs::path dir = config.out;
    make_dirs(dir);
    write_json(dir / "config.resolved.json", to_json(config));
    for (double ratio : config.m_over_n) {
        ExperimentConfig sub = config;
        sub.m_core = static_cast<std::size_t>(std::lround(static_cast<double>(config.n) * ratio));
        sub.m_over_n = {ratio};
        sub.out = (dir / ratio_label(ratio)).string();
        cmd_simulate(sub);
    }
}

}  // namespace wealthnet
