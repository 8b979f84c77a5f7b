#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace wealthnet {

using Vertex = std::uint32_t;

struct Edge {
    Vertex u;
    Vertex v;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable undirected simple graph. Edges keep generation order; each edge
/// is stored with u < v. A CSR adjacency and connected-component index are
/// built once at construction.
class Network {
public:
    Network() = default;

    /// Validates the simple-graph invariants (no self-loops, no duplicates,
    /// endpoints in range) and throws ParameterError on violation. Edges
    /// given as (v, u) with v > u are canonicalised.
    static Network from_edges(std::size_t n, std::vector<Edge> edges);

    std::size_t vertex_count() const noexcept { return degree_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const std::uint32_t> degrees() const noexcept { return degree_; }
    std::uint32_t degree(Vertex i) const noexcept { return degree_[i]; }
    std::uint32_t max_degree() const noexcept;

    std::span<const Vertex> neighbors(Vertex i) const noexcept {
        return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
    }

    std::uint32_t component_of(Vertex i) const noexcept { return component_[i]; }
    std::size_t component_count() const noexcept { return component_sizes_.size(); }
    std::size_t component_size(std::uint32_t c) const noexcept {
        return component_sizes_[c];
    }

    friend bool operator==(const Network& a, const Network& b) {
        return a.degree_.size() == b.degree_.size() && a.edges_ == b.edges_;
    }

private:
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> degree_;
    std::vector<std::size_t> offsets_;
    std::vector<Vertex> adjacency_;
    std::vector<std::uint32_t> component_;
    std::vector<std::size_t> component_sizes_;
};

namespace topology {

struct Complete { std::size_t n; };
struct ErdosRenyi { std::size_t n; double p_link; };
struct RingLattice { std::size_t n; std::size_t q; };
struct WattsStrogatz { std::size_t n; std::size_t q; double p_rewire; };
struct BarabasiAlbert { std::size_t n; std::size_t m0; std::size_t m; };
struct MixedCore { std::size_t n; std::size_t m_core; };
struct Octopus { std::size_t n; std::size_t m_core; double p_core = 0.5; };

}  // namespace topology

struct TopologySpec {
    using Model = std::variant<topology::Complete, topology::ErdosRenyi,
                               topology::RingLattice, topology::WattsStrogatz,
                               topology::BarabasiAlbert, topology::MixedCore,
                               topology::Octopus>;
    Model model;
    std::uint64_t seed = 0;
};

/// Throws ParameterError naming the violated bound.
void validate(const TopologySpec& spec);
std::size_t vertex_count(const TopologySpec& spec) noexcept;

Network build(const TopologySpec& spec);

Network complete_graph(std::size_t n);
Network erdos_renyi(std::size_t n, double p_link, std::uint64_t seed);
Network ring_lattice(std::size_t n, std::size_t q);
Network watts_strogatz(std::size_t n, std::size_t q, double p_rewire, std::uint64_t seed);
Network barabasi_albert(std::size_t n, std::size_t m0, std::size_t m, std::uint64_t seed);
Network mixed_core(std::size_t n, std::size_t m_core);
Network octopus(std::size_t n, std::size_t m_core, double p_core, std::uint64_t seed);

/// counts[k] is the number of vertices of degree k.
struct DegreeHistogram {
    std::vector<std::size_t> counts;

    std::size_t total() const noexcept;
    std::vector<double> frequencies() const;
};

DegreeHistogram degree_distribution(const Network& net);

/// Edge-list text format: `# n=<N>` header, then one `i j` line per edge
/// with i < j.
void write_edge_list(std::ostream& out, const Network& net);
void write_edge_list(const std::filesystem::path& path, const Network& net);
Network read_edge_list(std::istream& in);
Network read_edge_list(const std::filesystem::path& path);

}  // namespace wealthnet
