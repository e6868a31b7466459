#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ariel/types.hpp"

namespace ariel {

struct Link {
  LinkId id;
  NodeId src;
  NodeId dst;
  Bandwidth capacity = 0.0;
};

/// Directed multigraph with capacitated links. Node and link ids are dense
/// indices assigned in insertion order, which is also the lexicographic
/// order used for every tie-break in the library.
class Topology {
 public:
  NodeId add_node(std::string name);
  LinkId add_link(NodeId src, NodeId dst, Bandwidth capacity);

  std::size_t node_count() const { return names_.size(); }
  std::size_t link_count() const { return links_.size(); }

  const Link& link(LinkId id) const { return links_.at(id.value); }
  std::span<const Link> links() const { return links_; }
  std::span<const LinkId> out_links(NodeId n) const { return out_.at(n.value); }
  const std::string& node_name(NodeId n) const { return names_.at(n.value); }
  std::optional<NodeId> find_node(std::string_view name) const;

  bool contains(NodeId n) const { return n.valid() && n.value < names_.size(); }

  std::string name;

 private:
  std::vector<std::string> names_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
};

/// Link sequence from one node to another.
struct Path {
  std::vector<LinkId> links;

  std::size_t hops() const { return links.size(); }
  bool empty() const { return links.empty(); }
  bool contains(LinkId l) const;
  auto operator<=>(const Path&) const = default;
};

/// Nodes visited by `path`, starting at the source of the first link.
std::vector<NodeId> path_nodes(const Topology& topo, const Path& path);

/// True when `path` is connected end to end and visits no node twice.
bool is_simple_path(const Topology& topo, const Path& path);

/// Precomputed alternatives for every ordered node pair, index k = 0..K-1.
class PathSet {
 public:
  PathSet() = default;
  PathSet(const Topology& topo, std::size_t k);

  std::span<const Path> paths(NodePair pair) const;
  std::size_t k() const { return k_; }
  std::size_t node_count() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<std::vector<Path>> table_;
};

struct LoadOptions {
  Bandwidth default_capacity = 10e9;
};

/// Reads a GraphML or GML document (Topology Zoo conventions). The format
/// is chosen from the extension, falling back to sniffing the content.
Topology load_topology(const std::filesystem::path& file, const LoadOptions& opts = {});
Topology parse_gml(std::string_view text, const LoadOptions& opts = {});
Topology parse_graphml(std::string_view text, const LoadOptions& opts = {});

/// Directed GML with one edge per link, carrying the capacity.
std::string to_gml(const Topology& topo);

Topology make_grid(int side, Bandwidth capacity);
Topology make_full_mesh(int n, Bandwidth capacity);
Topology make_line(int n, Bandwidth capacity);
Topology make_ring(int n, Bandwidth capacity);

/// Hop distances from `src`; unreachable nodes get -1.
std::vector<int> bfs_distances(const Topology& topo, NodeId src);

/// Hop-wise shortest path with the lexicographically smallest link sequence
/// among the shortest ones. Links flagged in `banned` are skipped.
std::optional<Path> shortest_path(const Topology& topo, NodeId a, NodeId b,
                                  const std::vector<bool>* banned = nullptr);

/// Greedy link-disjoint alternatives: take a shortest path, remove its
/// links, repeat. Sorted by hop count, then lexicographic link ids.
std::vector<Path> k_disjoint_paths(const Topology& topo, NodeId a, NodeId b, std::size_t k);

/// Up to `k` loopless paths in nondecreasing hop count (Yen).
std::vector<Path> k_shortest_paths(const Topology& topo, NodeId a, NodeId b, std::size_t k);

double avg_shortest_path_length(const Topology& topo);
int diameter(const Topology& topo);
std::pair<NodeId, NodeId> most_distant_pair(const Topology& topo);

}  // namespace ariel
