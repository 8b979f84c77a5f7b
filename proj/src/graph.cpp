#include "wealthnet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>

#include "wealthnet/errors.hpp"
#include "wealthnet/rng.hpp"

namespace wealthnet {

namespace {

std::uint64_t edge_key(Vertex a, Vertex b) noexcept {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

[[noreturn]] void bad_parameter(const std::string& what) { throw ParameterError(what); }

void require_probability(const char* model, const char* name, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream msg;
        msg << model << ": " << name << " must lie in [0,1] (got " << p << ")";
        bad_parameter(msg.str());
    }
}

void require_vertex_range(std::size_t n) {
    if (n > std::numeric_limits<Vertex>::max()) bad_parameter("vertex count exceeds 2^32-1");
}

}  // namespace

Network Network::from_edges(std::size_t n, std::vector<Edge> edges) {
    require_vertex_range(n);
    for (auto& e : edges) {
        if (e.u >= n || e.v >= n) {
            bad_parameter("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                          ") references a vertex outside [0," + std::to_string(n) + ")");
        }
        if (e.u == e.v) bad_parameter("self-loop at vertex " + std::to_string(e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::vector<std::uint64_t> keys(edges.size());
    std::transform(edges.begin(), edges.end(), keys.begin(),
                   [](const Edge& e) { return edge_key(e.u, e.v); });
    std::sort(keys.begin(), keys.end());
    if (auto dup = std::adjacent_find(keys.begin(), keys.end()); dup != keys.end()) {
        bad_parameter("duplicate edge (" + std::to_string(*dup >> 32) + "," +
                      std::to_string(*dup & 0xffffffffu) + ")");
    }

    Network net;
    net.edges_ = std::move(edges);
    net.degree_.assign(n, 0);
    for (const auto& e : net.edges_) {
        ++net.degree_[e.u];
        ++net.degree_[e.v];
    }
    net.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) net.offsets_[i + 1] = net.offsets_[i] + net.degree_[i];
    net.adjacency_.resize(net.offsets_[n]);
    std::vector<std::size_t> cursor(net.offsets_.begin(), net.offsets_.end() - 1);
    for (const auto& e : net.edges_) {
        net.adjacency_[cursor[e.u]++] = e.v;
        net.adjacency_[cursor[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(net.adjacency_.begin() + static_cast<std::ptrdiff_t>(net.offsets_[i]),
                  net.adjacency_.begin() + static_cast<std::ptrdiff_t>(net.offsets_[i + 1]));
    }

    // Connected components by iterative DFS.
    constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
    net.component_.assign(n, unset);
    std::vector<Vertex> stack;
    for (std::size_t root = 0; root < n; ++root) {
        if (net.component_[root] != unset) continue;
        const auto id = static_cast<std::uint32_t>(net.component_sizes_.size());
        std::size_t size = 0;
        net.component_[root] = id;
        stack.push_back(static_cast<Vertex>(root));
        while (!stack.empty()) {
            const Vertex v = stack.back();
            stack.pop_back();
            ++size;
            for (Vertex w : net.neighbors(v)) {
                if (net.component_[w] == unset) {
                    net.component_[w] = id;
                    stack.push_back(w);
                }
            }
        }
        net.component_sizes_.push_back(size);
    }
    return net;
}

std::uint32_t Network::max_degree() const noexcept {
    return degree_.empty() ? 0 : *std::max_element(degree_.begin(), degree_.end());
}

void validate(const TopologySpec& spec) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if (m.n == 0) bad_parameter("topology: n must be positive");
            require_vertex_range(m.n);
            if constexpr (std::is_same_v<T, topology::ErdosRenyi>) {
                require_probability("erdos_renyi", "p_link", m.p_link);
            } else if constexpr (std::is_same_v<T, topology::RingLattice> ||
                                 std::is_same_v<T, topology::WattsStrogatz>) {
                if (m.q < 1) bad_parameter("ring: q must be at least 1");
                if (2 * m.q >= m.n) {
                    bad_parameter("ring: requires 2q < n (q=" + std::to_string(m.q) +
                                  ", n=" + std::to_string(m.n) + ")");
                }
                if constexpr (std::is_same_v<T, topology::WattsStrogatz>) {
                    require_probability("watts_strogatz", "p_rewire", m.p_rewire);
                }
            } else if constexpr (std::is_same_v<T, topology::BarabasiAlbert>) {
                if (!(1 <= m.m && m.m <= m.m0 && m.m0 < m.n)) {
                    bad_parameter("barabasi_albert: requires 1 <= m <= m0 < n (m=" +
                                  std::to_string(m.m) + ", m0=" + std::to_string(m.m0) +
                                  ", n=" + std::to_string(m.n) + ")");
                }
            } else if constexpr (std::is_same_v<T, topology::MixedCore>) {
                if (m.m_core > m.n) {
                    bad_parameter("mixed_core: requires m_core <= n (m_core=" +
                                  std::to_string(m.m_core) + ", n=" + std::to_string(m.n) + ")");
                }
            } else if constexpr (std::is_same_v<T, topology::Octopus>) {
                if (!(1 <= m.m_core && m.m_core <= m.n)) {
                    bad_parameter("octopus: requires 1 <= m_core <= n (m_core=" +
                                  std::to_string(m.m_core) + ", n=" + std::to_string(m.n) + ")");
                }
                require_probability("octopus", "p_core", m.p_core);
            }
        },
        spec.model);
}

std::size_t vertex_count(const TopologySpec& spec) noexcept {
    return std::visit([](const auto& m) { return m.n; }, spec.model);
}

Network build(const TopologySpec& spec) {
    validate(spec);
    return std::visit(
        [&](const auto& m) -> Network {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, topology::Complete>) {
                return complete_graph(m.n);
            } else if constexpr (std::is_same_v<T, topology::ErdosRenyi>) {
                return erdos_renyi(m.n, m.p_link, spec.seed);
            } else if constexpr (std::is_same_v<T, topology::RingLattice>) {
                return ring_lattice(m.n, m.q);
            } else if constexpr (std::is_same_v<T, topology::WattsStrogatz>) {
                return watts_strogatz(m.n, m.q, m.p_rewire, spec.seed);
            } else if constexpr (std::is_same_v<T, topology::BarabasiAlbert>) {
                return barabasi_albert(m.n, m.m0, m.m, spec.seed);
            } else if constexpr (std::is_same_v<T, topology::MixedCore>) {
                return mixed_core(m.n, m.m_core);
            } else {
                return octopus(m.n, m.m_core, m.p_core, spec.seed);
            }
        },
        spec.model);
}

Network complete_graph(std::size_t n) { return mixed_core(n, n); }

Network erdos_renyi(std::size_t n, double p_link, std::uint64_t seed) {
    validate({topology::ErdosRenyi{n, p_link}, seed});
    Rng rng(seed);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(p_link * static_cast<double>(n) *
                                           static_cast<double>(n - 1) / 2.0));
    for (Vertex i = 0; i < n; ++i) {
        for (Vertex j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p_link)) edges.push_back({i, j});
        }
    }
    return Network::from_edges(n, std::move(edges));
}

namespace {

std::vector<Edge> ring_edges(std::size_t n, std::size_t q) {
    std::vector<Edge> edges;
    edges.reserve(n * q);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 1; j <= q; ++j) {
            edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>((i + j) % n)});
        }
    }
    return edges;
}

}  // namespace

Network ring_lattice(std::size_t n, std::size_t q) {
    validate({topology::RingLattice{n, q}, 0});
    return Network::from_edges(n, ring_edges(n, q));
}

Network watts_strogatz(std::size_t n, std::size_t q, double p_rewire, std::uint64_t seed) {
    validate({topology::WattsStrogatz{n, q, p_rewire}, seed});
    auto edges = ring_edges(n, q);
    std::unordered_set<std::uint64_t> present;
    present.reserve(edges.size() * 2);
    for (const auto& e : edges) present.insert(edge_key(e.u, e.v));

    Rng rng(seed);
    for (auto& e : edges) {
        if (!rng.bernoulli(p_rewire)) continue;
        // Keep e.u, move the far end. The old edge is removed first so the
        // original target stays eligible and a valid target always exists.
        present.erase(edge_key(e.u, e.v));
        Vertex target;
        do {
            target = static_cast<Vertex>(rng.below(n));
        } while (target == e.u || present.contains(edge_key(e.u, target)));
        e.v = target;
        present.insert(edge_key(e.u, target));
    }
    return Network::from_edges(n, std::move(edges));
}

Network barabasi_albert(std::size_t n, std::size_t m0, std::size_t m, std::uint64_t seed) {
    validate({topology::BarabasiAlbert{n, m0, m}, seed});
    Rng rng(seed);
    std::vector<Edge> edges;
    edges.reserve((n - m0) * m);
    // One entry per edge endpoint: uniform choice from this list is choice
    // proportional to degree.
    std::vector<Vertex> endpoints;
    endpoints.reserve(2 * (n - m0) * m);
    std::vector<Vertex> targets;
    targets.reserve(m);

    for (std::size_t v = m0; v < n; ++v) {
        targets.clear();
        while (targets.size() < m) {
            const Vertex t = endpoints.empty()
                                 ? static_cast<Vertex>(rng.below(v))
                                 : endpoints[rng.below(endpoints.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
                targets.push_back(t);
            }
        }
        for (Vertex t : targets) {
            edges.push_back({t, static_cast<Vertex>(v)});
            endpoints.push_back(t);
            endpoints.push_back(static_cast<Vertex>(v));
        }
    }
    return Network::from_edges(n, std::move(edges));
}

Network mixed_core(std::size_t n, std::size_t m_core) {
    validate({topology::MixedCore{n, m_core}, 0});
    std::vector<Edge> edges;
    edges.reserve(m_core * (m_core - (m_core > 0 ? 1 : 0)) / 2);
    for (Vertex i = 0; i < m_core; ++i) {
        for (Vertex j = i + 1; j < m_core; ++j) edges.push_back({i, j});
    }
    return Network::from_edges(n, std::move(edges));
}

Network octopus(std::size_t n, std::size_t m_core, double p_core, std::uint64_t seed) {
    validate({topology::Octopus{n, m_core, p_core}, seed});
    const Network core = erdos_renyi(m_core, p_core, seed);
    std::vector<Edge> edges(core.edges().begin(), core.edges().end());
    edges.reserve(edges.size() + (n - m_core));
    Rng rng(derive_seed(seed, 1));
    for (std::size_t t = m_core; t < n; ++t) {
        edges.push_back({static_cast<Vertex>(rng.below(m_core)), static_cast<Vertex>(t)});
    }
    return Network::from_edges(n, std::move(edges));
}

std::size_t DegreeHistogram::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::vector<double> DegreeHistogram::frequencies() const {
    const double n = static_cast<double>(total());
    std::vector<double> f(counts.size());
    std::transform(counts.begin(), counts.end(), f.begin(),
                   [n](std::size_t c) { return static_cast<double>(c) / n; });
    return f;
}

DegreeHistogram degree_distribution(const Network& net) {
    DegreeHistogram h;
    if (net.vertex_count() == 0) return h;
    h.counts.assign(net.max_degree() + 1, 0);
    for (auto k : net.degrees()) ++h.counts[k];
    return h;
}

void write_edge_list(std::ostream& out, const Network& net) {
    out << "# n=" << net.vertex_count() << '\n';
    for (const auto& e : net.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_edge_list(const std::filesystem::path& path, const Network& net) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_edge_list(out, net);
    if (!out) throw IoError("write failed for " + path.string());
}

Network read_edge_list(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("# n=")) {
        throw ParameterError("edge list: missing '# n=<N>' header");
    }
    std::size_t n = 0;
    {
        const char* first = line.data() + 4;
        const char* last = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(first, last, n);
        if (ec != std::errc{} || ptr != last) {
            throw ParameterError("edge list: malformed header '" + line + "'");
        }
    }
    std::vector<Edge> edges;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::uint64_t a, b;
        std::string extra;
        if (!(fields >> a >> b) || (fields >> extra)) {
            throw ParameterError("edge list: malformed line " + std::to_string(lineno));
        }
        if (a >= b) {
            throw ParameterError("edge list: line " + std::to_string(lineno) +
                                 " must satisfy i < j");
        }
        if (b >= n) {
            throw ParameterError("edge list: line " + std::to_string(lineno) +
                                 " references vertex " + std::to_string(b) + " >= n");
        }
        edges.push_back({static_cast<Vertex>(a), static_cast<Vertex>(b)});
    }
    return Network::from_edges(n, std::move(edges));
}

Network read_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_edge_list(in);
}

}  // namespace wealthnet
