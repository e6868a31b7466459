#include "ariel/topology.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace ariel {

NodeId Topology::add_node(std::string node_name) {
  NodeId id{static_cast<std::uint32_t>(names_.size())};
  names_.push_back(std::move(node_name));
  out_.emplace_back();
  return id;
}

LinkId Topology::add_link(NodeId src, NodeId dst, Bandwidth capacity) {
  if (!contains(src) || !contains(dst)) {
    throw Error(ErrorCode::Structure, "link endpoint is not a node of the topology");
  }
  if (src == dst) {
    throw Error(ErrorCode::Structure, "self-loop on node '" + node_name(src) + "'");
  }
  if (!(capacity > 0.0)) {
    throw Error(ErrorCode::Structure, "link " + node_name(src) + "->" + node_name(dst) +
                                          " has non-positive capacity");
  }
  LinkId id{static_cast<std::uint32_t>(links_.size())};
  links_.push_back(Link{id, src, dst, capacity});
  out_[src.value].push_back(id);
  return id;
}

std::optional<NodeId> Topology::find_node(std::string_view node_name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == node_name) return NodeId{static_cast<std::uint32_t>(i)};
  }
  return std::nullopt;
}

bool Path::contains(LinkId l) const { return std::find(links.begin(), links.end(), l) != links.end(); }

std::vector<NodeId> path_nodes(const Topology& topo, const Path& path) {
  std::vector<NodeId> nodes;
  if (path.links.empty()) return nodes;
  nodes.reserve(path.links.size() + 1);
  nodes.push_back(topo.link(path.links.front()).src);
  for (LinkId l : path.links) nodes.push_back(topo.link(l).dst);
  return nodes;
}

bool is_simple_path(const Topology& topo, const Path& path) {
  for (std::size_t i = 1; i < path.links.size(); ++i) {
    if (topo.link(path.links[i - 1]).dst != topo.link(path.links[i]).src) return false;
  }
  auto nodes = path_nodes(topo, path);
  std::sort(nodes.begin(), nodes.end());
  return std::adjacent_find(nodes.begin(), nodes.end()) == nodes.end();
}

// ---------------------------------------------------------------------------
// Paths

namespace {

std::vector<std::vector<LinkId>> in_links(const Topology& topo) {
  std::vector<std::vector<LinkId>> in(topo.node_count());
  for (const Link& l : topo.links()) in[l.dst.value].push_back(l.id);
  return in;
}

std::vector<int> distances_to(const Topology& topo, const std::vector<std::vector<LinkId>>& in, NodeId target,
                              const std::vector<bool>* banned) {
  std::vector<int> dist(topo.node_count(), -1);
  std::deque<NodeId> queue{target};
  dist[target.value] = 0;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (LinkId l : in[v.value]) {
      if (banned && (*banned)[l.value]) continue;
      NodeId u = topo.link(l).src;
      if (dist[u.value] < 0) {
        dist[u.value] = dist[v.value] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

std::optional<Path> shortest_with(const Topology& topo, const std::vector<std::vector<LinkId>>& in, NodeId a,
                                  NodeId b, const std::vector<bool>* banned) {
  if (a == b) return std::nullopt;
  auto dist = distances_to(topo, in, b, banned);
  if (dist[a.value] < 0) return std::nullopt;
  Path path;
  NodeId u = a;
  while (u != b) {
    // out_links are in ascending id order, so the first match is the
    // lexicographically smallest continuation.
    for (LinkId l : topo.out_links(u)) {
      if (banned && (*banned)[l.value]) continue;
      NodeId v = topo.link(l).dst;
      if (dist[v.value] == dist[u.value] - 1) {
        path.links.push_back(l);
        u = v;
        break;
      }
    }
  }
  return path;
}

bool path_less(const Path& x, const Path& y) {
  if (x.hops() != y.hops()) return x.hops() < y.hops();
  return x.links < y.links;
}

}  // namespace

std::optional<Path> shortest_path(const Topology& topo, NodeId a, NodeId b, const std::vector<bool>* banned) {
  if (!topo.contains(a) || !topo.contains(b)) throw Error(ErrorCode::Argument, "unknown node");
  return shortest_with(topo, in_links(topo), a, b, banned);
}

std::vector<Path> k_disjoint_paths(const Topology& topo, NodeId a, NodeId b, std::size_t k) {
  if (!topo.contains(a) || !topo.contains(b)) throw Error(ErrorCode::Argument, "unknown node");
  if (a == b) throw Error(ErrorCode::Argument, "k_disjoint_paths needs distinct endpoints");
  auto in = in_links(topo);
  std::vector<bool> banned(topo.link_count(), false);
  std::vector<Path> out;
  while (out.size() < k) {
    auto p = shortest_with(topo, in, a, b, &banned);
    if (!p) break;
    for (LinkId l : p->links) banned[l.value] = true;
    out.push_back(std::move(*p));
  }
  std::sort(out.begin(), out.end(), path_less);
  return out;
}

std::vector<Path> k_shortest_paths(const Topology& topo, NodeId a, NodeId b, std::size_t k) {
  if (!topo.contains(a) || !topo.contains(b)) throw Error(ErrorCode::Argument, "unknown node");
  std::vector<Path> accepted;
  if (a == b || k == 0) return accepted;
  auto in = in_links(topo);
  auto first = shortest_with(topo, in, a, b, nullptr);
  if (!first) return accepted;
  accepted.push_back(std::move(*first));

  auto cmp = [](const Path& x, const Path& y) { return path_less(x, y); };
  std::set<Path, decltype(cmp)> candidates(cmp);

  while (accepted.size() < k) {
    const Path last = accepted.back();
    auto last_nodes = path_nodes(topo, last);
    for (std::size_t j = 0; j < last.links.size(); ++j) {
      NodeId spur = last_nodes[j];
      std::vector<LinkId> root(last.links.begin(), last.links.begin() + static_cast<std::ptrdiff_t>(j));
      std::vector<bool> banned(topo.link_count(), false);
      for (const Path& p : accepted) {
        if (p.links.size() > j && std::equal(root.begin(), root.end(), p.links.begin())) {
          banned[p.links[j].value] = true;
        }
      }
      // Root nodes other than the spur node may not be revisited.
      for (std::size_t r = 0; r < j; ++r) {
        NodeId n = last_nodes[r];
        for (LinkId l : topo.out_links(n)) banned[l.value] = true;
        for (LinkId l : in[n.value]) banned[l.value] = true;
      }
      auto spur_path = shortest_with(topo, in, spur, b, &banned);
      if (!spur_path) continue;
      Path total{root};
      total.links.insert(total.links.end(), spur_path->links.begin(), spur_path->links.end());
      if (std::find(accepted.begin(), accepted.end(), total) == accepted.end()) candidates.insert(std::move(total));
    }
    if (candidates.empty()) break;
    accepted.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }
  return accepted;
}

PathSet::PathSet(const Topology& topo, std::size_t k) : n_(topo.node_count()), k_(k), table_(n_ * n_) {
  if (k == 0) throw Error(ErrorCode::Argument, "path set needs k >= 1");
  for (std::uint32_t a = 0; a < n_; ++a) {
    for (std::uint32_t b = 0; b < n_; ++b) {
      if (a == b) continue;
      table_[a * n_ + b] = k_disjoint_paths(topo, NodeId{a}, NodeId{b}, k);
    }
  }
}

std::span<const Path> PathSet::paths(NodePair pair) const {
  if (pair.from.value >= n_ || pair.to.value >= n_) return {};
  return table_[pair.from.value * n_ + pair.to.value];
}

// ---------------------------------------------------------------------------
// Metrics

std::vector<int> bfs_distances(const Topology& topo, NodeId src) {
  std::vector<int> dist(topo.node_count(), -1);
  std::deque<NodeId> queue{src};
  dist[src.value] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (LinkId l : topo.out_links(u)) {
      NodeId v = topo.link(l).dst;
      if (dist[v.value] < 0) {
        dist[v.value] = dist[u.value] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

double avg_shortest_path_length(const Topology& topo) {
  if (topo.node_count() < 2) throw Error(ErrorCode::Argument, "average shortest path length needs >= 2 nodes");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::uint32_t a = 0; a < topo.node_count(); ++a) {
    auto dist = bfs_distances(topo, NodeId{a});
    for (std::uint32_t b = 0; b < topo.node_count(); ++b) {
      if (a == b || dist[b] < 0) continue;
      sum += dist[b];
      ++pairs;
    }
  }
  if (pairs == 0) throw Error(ErrorCode::Argument, "topology has no reachable node pair");
  return sum / static_cast<double>(pairs);
}

int diameter(const Topology& topo) {
  int best = 0;
  for (std::uint32_t a = 0; a < topo.node_count(); ++a) {
    for (int d : bfs_distances(topo, NodeId{a})) best = std::max(best, d);
  }
  return best;
}

std::pair<NodeId, NodeId> most_distant_pair(const Topology& topo) {
  if (topo.node_count() < 2) throw Error(ErrorCode::Argument, "most distant pair needs >= 2 nodes");
  int best = -1;
  std::pair<NodeId, NodeId> out;
  for (std::uint32_t a = 0; a < topo.node_count(); ++a) {
    auto dist = bfs_distances(topo, NodeId{a});
    for (std::uint32_t b = 0; b < topo.node_count(); ++b) {
      if (a != b && dist[b] > best) {
        best = dist[b];
        out = {NodeId{a}, NodeId{b}};
      }
    }
  }
  if (best < 0) throw Error(ErrorCode::Argument, "topology has no reachable node pair");
  return out;
}

// ---------------------------------------------------------------------------
// Generators

Topology make_grid(int side, Bandwidth capacity) {
  if (side < 2) throw Error(ErrorCode::Argument, "grid side must be >= 2");
  Topology t;
  t.name = "grid" + std::to_string(side) + "x" + std::to_string(side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) t.add_node(std::to_string(r) + "_" + std::to_string(c));
  auto id = [side](int r, int c) { return NodeId{static_cast<std::uint32_t>(r * side + c)}; };
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      if (c + 1 < side) {
        t.add_link(id(r, c), id(r, c + 1), capacity);
        t.add_link(id(r, c + 1), id(r, c), capacity);
      }
      if (r + 1 < side) {
        t.add_link(id(r, c), id(r + 1, c), capacity);
        t.add_link(id(r + 1, c), id(r, c), capacity);
      }
    }
  }
  return t;
}

Topology make_full_mesh(int n, Bandwidth capacity) {
  if (n < 2) throw Error(ErrorCode::Argument, "mesh needs >= 2 nodes");
  Topology t;
  t.name = "mesh" + std::to_string(n);
  for (int i = 0; i < n; ++i) t.add_node(std::to_string(i));
  for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(n); ++a)
    for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(n); ++b)
      if (a != b) t.add_link(NodeId{a}, NodeId{b}, capacity);
  return t;
}

Topology make_line(int n, Bandwidth capacity) {
  if (n < 2) throw Error(ErrorCode::Argument, "line needs >= 2 nodes");
  Topology t;
  t.name = "line" + std::to_string(n);
  for (int i = 0; i < n; ++i) t.add_node(std::to_string(i));
  for (std::uint32_t i = 0; i + 1 < static_cast<std::uint32_t>(n); ++i) {
    t.add_link(NodeId{i}, NodeId{i + 1}, capacity);
    t.add_link(NodeId{i + 1}, NodeId{i}, capacity);
  }
  return t;
}

Topology make_ring(int n, Bandwidth capacity) {
  if (n < 3) throw Error(ErrorCode::Argument, "ring needs >= 3 nodes");
  Topology t;
  t.name = "ring" + std::to_string(n);
  for (int i = 0; i < n; ++i) t.add_node(std::to_string(i));
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i) {
    NodeId a{i};
    NodeId b{(i + 1) % static_cast<std::uint32_t>(n)};
    t.add_link(a, b, capacity);
    t.add_link(b, a, capacity);
  }
  return t;
}

// ---------------------------------------------------------------------------
// GML

namespace {

struct GmlValue;
using GmlList = std::vector<std::pair<std::string, GmlValue>>;

struct GmlValue {
  std::string scalar;
  bool is_string = false;
  std::shared_ptr<GmlList> list;
  int line = 0;
};

class GmlReader {
 public:
  explicit GmlReader(std::string_view text) : text_(text) {}

  GmlList parse_top() {
    GmlList items = parse_items(false);
    return items;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::Parse, "GML parse error at line " + std::to_string(line_) + ": " + msg);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  GmlList parse_items(bool nested) {
    GmlList items;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) {
        if (nested) fail("unterminated list, missing ']'");
        return items;
      }
      if (text_[pos_] == ']') {
        if (!nested) fail("unexpected ']'");
        ++pos_;
        return items;
      }
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      if (start == pos_) fail(std::string("expected a key, found '") + text_[pos_] + "'");
      std::string key(text_.substr(start, pos_ - start));
      skip_space();
      if (pos_ >= text_.size()) fail("missing value for key '" + key + "'");
      GmlValue value;
      value.line = line_;
      char c = text_[pos_];
      if (c == '[') {
        ++pos_;
        value.list = std::make_shared<GmlList>(parse_items(true));
      } else if (c == '"') {
        ++pos_;
        std::size_t s = pos_;
        while (pos_ < text_.size() && text_[pos_] != '"') {
          if (text_[pos_] == '\n') ++line_;
          ++pos_;
        }
        if (pos_ >= text_.size()) fail("unterminated string for key '" + key + "'");
        value.scalar = std::string(text_.substr(s, pos_ - s));
        value.is_string = true;
        ++pos_;
      } else {
        std::size_t s = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != ']' &&
               text_[pos_] != '[')
          ++pos_;
        value.scalar = std::string(text_.substr(s, pos_ - s));
        if (value.scalar.empty()) fail("missing value for key '" + key + "'");
      }
      items.emplace_back(std::move(key), std::move(value));
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

const GmlValue* find_key(const GmlList& list, std::string_view key) {
  for (const auto& [k, v] : list)
    if (k == key) return &v;
  return nullptr;
}

std::optional<double> to_number(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<double> capacity_attribute(const GmlList& edge) {
  for (const char* key : {"capacity", "LinkSpeedRaw"}) {
    if (const GmlValue* v = find_key(edge, key); v && !v->list) {
      if (auto num = to_number(v->scalar)) return num;
    }
  }
  return std::nullopt;
}

}  // namespace

Topology parse_gml(std::string_view text, const LoadOptions& opts) {
  GmlReader reader(text);
  GmlList top = reader.parse_top();
  const GmlValue* graph = find_key(top, "graph");
  if (!graph || !graph->list) throw Error(ErrorCode::Parse, "GML parse error: no 'graph [ ... ]' element");
  const GmlList& g = *graph->list;

  bool directed = false;
  if (const GmlValue* d = find_key(g, "directed"); d && !d->list) directed = d->scalar == "1";

  Topology topo;
  if (const GmlValue* label = find_key(g, "label"); label && !label->list) topo.name = label->scalar;
  std::map<std::string, NodeId> ids;
  for (const auto& [key, value] : g) {
    if (key != "node") continue;
    if (!value.list) throw Error(ErrorCode::Parse, "GML parse error at line " + std::to_string(value.line) +
                                                       ": 'node' must be a list");
    const GmlValue* id = find_key(*value.list, "id");
    if (!id || id->list)
      throw Error(ErrorCode::Parse, "GML parse error at line " + std::to_string(value.line) + ": node without id");
    if (ids.count(id->scalar))
      throw Error(ErrorCode::Structure, "GML node id '" + id->scalar + "' is declared twice");
    const GmlValue* label = find_key(*value.list, "label");
    std::string name = (label && !label->list) ? label->scalar : id->scalar;
    ids.emplace(id->scalar, topo.add_node(name));
  }
  int edge_index = 0;
  for (const auto& [key, value] : g) {
    if (key != "edge") continue;
    if (!value.list) throw Error(ErrorCode::Parse, "GML parse error at line " + std::to_string(value.line) +
                                                       ": 'edge' must be a list");
    const GmlValue* src = find_key(*value.list, "source");
    const GmlValue* dst = find_key(*value.list, "target");
    if (!src || !dst || src->list || dst->list)
      throw Error(ErrorCode::Parse, "GML parse error at line " + std::to_string(value.line) +
                                        ": edge without source/target");
    auto s = ids.find(src->scalar);
    auto d = ids.find(dst->scalar);
    if (s == ids.end() || d == ids.end()) {
      const std::string& bad = s == ids.end() ? src->scalar : dst->scalar;
      throw Error(ErrorCode::Structure, "GML edge " + std::to_string(edge_index) + " (line " +
                                            std::to_string(value.line) + ") references unknown node '" + bad + "'");
    }
    Bandwidth cap = capacity_attribute(*value.list).value_or(opts.default_capacity);
    if (s->second != d->second) {
      topo.add_link(s->second, d->second, cap);
      if (!directed) topo.add_link(d->second, s->second, cap);
    }
    ++edge_index;
  }
  return topo;
}

std::string to_gml(const Topology& topo) {
  std::ostringstream os;
  os.precision(17);
  os << "graph [\n  directed 1\n";
  if (!topo.name.empty()) os << "  label \"" << topo.name << "\"\n";
  for (std::uint32_t i = 0; i < topo.node_count(); ++i) {
    os << "  node [\n    id " << i << "\n    label \"" << topo.node_name(NodeId{i}) << "\"\n  ]\n";
  }
  for (const Link& l : topo.links()) {
    os << "  edge [\n    source " << l.src.value << "\n    target " << l.dst.value << "\n    capacity " << l.capacity
       << "\n  ]\n";
  }
  os << "]\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Loading

Topology load_topology(const std::filesystem::path& file, const LoadOptions& opts) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open topology file '" + file.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  std::string ext = file.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  bool graphml = ext == ".graphml" || ext == ".xml";
  if (ext != ".gml" && !graphml) graphml = text.find("<graphml") != std::string::npos;

  Topology topo = graphml ? parse_graphml(text, opts) : parse_gml(text, opts);
  if (topo.name.empty()) topo.name = file.stem().string();
  return topo;
}

}  // namespace ariel
