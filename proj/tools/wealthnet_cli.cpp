#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wealthnet/errors.hpp"
#include "wealthnet/runner.hpp"

namespace {

using wealthnet::ExperimentConfig;

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::string> topology;
    std::optional<std::size_t> n, m_core, q, m0, m;
    std::optional<double> p_core, p_link, p_rewire;
    std::optional<std::string> coupling;
    std::optional<double> j, sigma2, m_drift, dt;
    std::optional<std::uint64_t> steps, burn_in, snapshot_every, seed;
    std::optional<std::size_t> ensemble;
    std::vector<double> m_over_n;
    std::optional<std::string> out;
    unsigned threads = 1;

    void attach(CLI::App& cmd, bool with_out = true) {
        cmd.add_option("--config", config, "JSON config file; flags override its values");
        cmd.add_option("--topology", topology,
                       "complete|erdos_renyi|ring|watts_strogatz|barabasi_albert|mixed|octopus");
        cmd.add_option("--n", n, "Vertex count");
        cmd.add_option("--m-core", m_core, "Core size for mixed and octopus networks");
        cmd.add_option("--p-core", p_core, "Link probability inside the octopus core");
        cmd.add_option("--p-link", p_link, "Erdos-Renyi link probability");
        cmd.add_option("--q", q, "Ring half-degree");
        cmd.add_option("--p-rewire", p_rewire, "Watts-Strogatz rewiring probability");
        cmd.add_option("--m0", m0, "Barabasi-Albert seed vertices");
        cmd.add_option("--m", m, "Barabasi-Albert links per new vertex");
        cmd.add_option("--coupling", coupling, "uniform_over_n|degree_normalized");
        cmd.add_option("--j", j, "Coupling strength J");
        cmd.add_option("--sigma2", sigma2, "Noise scale sigma^2");
        cmd.add_option("--m-drift", m_drift, "Noise mean m");
        cmd.add_option("--dt", dt, "Time step");
        cmd.add_option("--steps", steps, "Total steps, burn-in included");
        cmd.add_option("--burn-in", burn_in, "Steps before the first snapshot");
        cmd.add_option("--snapshot-every", snapshot_every, "Snapshot stride after burn-in; 0 disables");
        cmd.add_option("--ensemble", ensemble, "Independent runs");
        cmd.add_option("--seed", seed, "Master seed");
        cmd.add_option("--m-over-n", m_over_n, "Core fractions for sweeps and figures");
        if (with_out) cmd.add_option("--out", out, "Output directory");
        cmd.add_option("--threads", threads, "Worker threads for ensemble runs")->check(CLI::PositiveNumber);
    }

    ExperimentConfig resolve(ExperimentConfig base) const {
        ExperimentConfig c = config ? wealthnet::load_config(*config, std::move(base)) : std::move(base);
        auto put = [](auto& field, const auto& value) {
            if (value) field = *value;
        };
        put(c.topology, topology);
        put(c.n, n);
        put(c.m_core, m_core);
        put(c.p_core, p_core);
        put(c.p_link, p_link);
        put(c.q, q);
        put(c.p_rewire, p_rewire);
        put(c.m0, m0);
        put(c.m, m);
        if (coupling) {
            nlohmann::json j{{"version", wealthnet::kConfigVersion}, {"coupling", *coupling}};
            c = wealthnet::config_from_json(j, c);
        }
        put(c.dynamics.J, j);
        put(c.dynamics.sigma2, sigma2);
        put(c.dynamics.drift, m_drift);
        put(c.dynamics.dt, dt);
        put(c.steps, steps);
        put(c.burn_in, burn_in);
        put(c.snapshot_every, snapshot_every);
        put(c.ensemble, ensemble);
        put(c.seed, seed);
        if (!m_over_n.empty()) c.m_over_n = m_over_n;
        put(c.out, out);
        c.threads = threads;
        return c;
    }
};

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

void print_stationarity(const wealthnet::SimulateSummary& s) {
    std::cout << "runs=" << s.runs << " pooled_samples=" << s.pooled_samples << " stationarity=";
    if (s.stationarity.ks) {
        std::cout << (s.stationarity.passed ? "pass" : "fail") << " ks=" << *s.stationarity.ks;
    } else {
        std::cout << "n/a";
    }
    std::cout << '\n';
    if (s.fit_error) std::cout << "fit skipped: " << one_line(*s.fit_error) << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Wealth-exchange dynamics on networks: simulate, fit and correlate"};
    app.require_subcommand(1);

    Overrides net_opts;
    std::string edge_path;
    auto* net = app.add_subcommand("net", "Generate a network and write its edge list");
    net_opts.attach(*net, false);
    net->add_option("--out", edge_path, "Edge-list file")->required();

    Overrides sim_opts;
    auto* sim = app.add_subcommand("simulate", "Run an ensemble and write snapshots, pool and fits");
    sim_opts.attach(*sim);

    std::string samples, mode = "auto", column, fit_out = ".";
    std::optional<double> w_min, upper_cut, core_fraction;
    auto* fit = app.add_subcommand("fit", "Fit a Pareto, Gibrat or mixture law to samples");
    fit->add_option("samples", samples, "One positive value per line, or a CSV with --column")->required();
    fit->add_option("--mode", mode, "pareto|gibrat|mixture|auto");
    fit->add_option("--column", column, "CSV column to read, e.g. w_norm");
    fit->add_option("--w-min", w_min, "Fixed Pareto threshold; default selects it");
    fit->add_option("--upper-cut", upper_cut, "Right truncation for the Gibrat fit");
    fit->add_option("--core-fraction", core_fraction, "Known core fraction for mixture fits");
    fit->add_option("--out", fit_out, "Output directory for fit.json and eccdf.csv");

    Overrides sweep_opts;
    auto* sweep = app.add_subcommand("sweep-correlations", "Correlation coefficients across core fractions");
    sweep_opts.attach(*sweep);

    Overrides fig_opts;
    std::string figure_name;
    bool dump_preset = false;
    auto* figure = app.add_subcommand("figure", "Run a figure preset (fig2, fig4, fig5)");
    figure->add_option("name", figure_name, "fig2|fig4|fig5")->required();
    figure->add_flag("--dump-preset", dump_preset, "Print the resolved preset as JSON and exit");
    fig_opts.attach(*figure);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "parameter-error: " << one_line(e.what()) << '\n';
        return 2;
    }

    if (*net) {
        const auto c = net_opts.resolve(ExperimentConfig{});
        const auto s = wealthnet::cmd_net(c, edge_path);
        std::cout << "n=" << s.n << " edges=" << s.edges << " k_min=" << s.k_min
                  << " k_mean=" << s.k_mean << " k_max=" << s.k_max << '\n';
    } else if (*sim) {
        print_stationarity(wealthnet::cmd_simulate(sim_opts.resolve(ExperimentConfig{})));
    } else if (*fit) {
        wealthnet::FitRequest req;
        req.samples = samples;
        req.column = column;
        req.mode = wealthnet::parse_fit_mode(mode);
        req.w_min = w_min;
        req.upper_cut = upper_cut;
        req.core_fraction = core_fraction;
        req.out_dir = fit_out;
        const auto report = wealthnet::cmd_fit(req);
        std::cout << report.dump() << '\n';
    } else if (*sweep) {
        const auto reports = wealthnet::cmd_sweep_correlations(sweep_opts.resolve(ExperimentConfig{}));
        wealthnet::write_correlations_csv(std::cout, reports);
    } else if (*figure) {
        const auto c = fig_opts.resolve(wealthnet::preset(figure_name));
        if (dump_preset) {
            std::cout << wealthnet::to_json(c).dump(2) << '\n';
            return 0;
        }
        wealthnet::cmd_figure(figure_name, c);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const wealthnet::NumericalError& e) {
        std::cerr << e.kind() << ": " << one_line(e.what()) << '\n';
        return 3;
    } catch (const wealthnet::IoError& e) {
        std::cerr << e.kind() << ": " << one_line(e.what()) << '\n';
        return 4;
    } catch (const wealthnet::Error& e) {
        std::cerr << e.kind() << ": " << one_line(e.what()) << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal-error: " << one_line(e.what()) << '\n';
        return 1;
    }
}
