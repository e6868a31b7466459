#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <map>
#include <sstream>

#include "ariel/topology.hpp"

namespace ariel {

namespace pt = boost::property_tree;

namespace {

std::string attr(const pt::ptree& node, const char* name) {
  // '/' as separator: GraphML attribute names such as attr.name contain dots
  return node.get<std::string>(pt::ptree::path_type(std::string("<xmlattr>/") + name, '/'), "");
}

}  // namespace

Topology parse_graphml(std::string_view text, const LoadOptions& opts) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::Parse, "GraphML parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  auto root = doc.get_child_optional("graphml");
  if (!root) throw Error(ErrorCode::Parse, "GraphML parse error: missing <graphml> root");

  // key id -> attribute name, for node labels and edge capacities
  std::map<std::string, std::string> node_keys, edge_keys;
  for (const auto& [tag, child] : *root) {
    if (tag != "key") continue;
    std::string domain = attr(child, "for");
    std::string name = attr(child, "attr.name");
    if (domain == "node") node_keys[attr(child, "id")] = name;
    if (domain == "edge") edge_keys[attr(child, "id")] = name;
  }

  auto graph = root->get_child_optional("graph");
  if (!graph) throw Error(ErrorCode::Parse, "GraphML parse error: missing <graph> element");
  bool directed = attr(*graph, "edgedefault") == "directed";

  Topology topo;
  std::map<std::string, NodeId> ids;
  for (const auto& [tag, child] : *graph) {
    if (tag != "node") continue;
    std::string id = attr(child, "id");
    if (id.empty()) throw Error(ErrorCode::Parse, "GraphML parse error: <node> without id");
    if (ids.count(id)) throw Error(ErrorCode::Structure, "GraphML node id '" + id + "' is declared twice");
    std::string label = id;
    for (const auto& [dtag, data] : child) {
      if (dtag == "data" && node_keys[attr(data, "key")] == "label") label = data.get_value<std::string>();
    }
    ids.emplace(id, topo.add_node(label));
  }

  int edge_index = 0;
  for (const auto& [tag, child] : *graph) {
    if (tag != "edge") continue;
    std::string s = attr(child, "source");
    std::string d = attr(child, "target");
    auto si = ids.find(s);
    auto di = ids.find(d);
    if (si == ids.end() || di == ids.end()) {
      throw Error(ErrorCode::Structure, "GraphML edge " + std::to_string(edge_index) + " references unknown node '" +
                                            (si == ids.end() ? s : d) + "'");
    }
    Bandwidth cap = opts.default_capacity;
    bool edge_directed = directed;
    if (std::string dir = attr(child, "directed"); !dir.empty()) edge_directed = dir == "true";
    for (const auto& [dtag, data] : child) {
      if (dtag != "data") continue;
      const std::string& key = edge_keys[attr(data, "key")];
      if (key == "capacity" || key == "LinkSpeedRaw") {
        try {
          cap = std::stod(data.get_value<std::string>());
        } catch (const std::exception&) {
          throw Error(ErrorCode::Parse, "GraphML edge " + std::to_string(edge_index) + " has a non-numeric " + key);
        }
      }
    }
    if (si->second != di->second) {
      topo.add_link(si->second, di->second, cap);
      if (!edge_directed) topo.add_link(di->second, si->second, cap);
    }
    ++edge_index;
  }
  return topo;
}

}  // namespace ariel
