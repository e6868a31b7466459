#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "ariel/types.hpp"

namespace ariel {

struct RowEL {
  EntityId entity;
  LinkId link;
  Step time = 0;
  auto operator<=>(const RowEL&) const = default;
};

struct RowLN {
  LinkId link;
  NodeId node;
  Step time = 0;
  auto operator<=>(const RowLN&) const = default;
};

/// What the flood detector saw at one step: the flooded links, and per link
/// the entities that started flows on it this step and the nodes it serves.
struct FloodObservation {
  Step time = 0;
  std::set<LinkId> flooded_links;
  std::map<LinkId, std::set<EntityId>> suspects;
  std::map<LinkId, std::set<NodeId>> nodes;

  const std::set<EntityId>& suspects_of(LinkId l) const;
  const std::set<NodeId>& nodes_of(LinkId l) const;
};

/// Drops every link whose suspect and node sets are both contained in those
/// of another link. Of two links with identical sets the larger id goes.
FloodObservation filter_shadowed_links(const FloodObservation& obs);

enum class RelationKind { EntityAny, AnyNode, EntityNode };

const char* relation_kind_tag(RelationKind kind);  // "E*", "*N", "EN"

/// e->*, *->n or e->n. A wildcard side holds an invalid id.
struct Relation {
  RelationKind kind = RelationKind::EntityAny;
  EntityId left;
  NodeId right;
  std::uint64_t support = 0;  // raw row count
  double normalized = 0.0;    // per-step support at the latest step
  double log_support = 0.0;   // sum over steps of log(max(s_t, floor))
  bool full_support = false;  // e->n whose link sets coincided (vanishing denominator)
  double strength = 0.0;
};

inline constexpr double kSupportFloor = 1e-9;

/// Overlap ratio |A∩B| / (|A∪B| - |A∩B|) from the three cardinalities.
/// Returns the intersection itself when the denominator vanishes and sets
/// `full` in that case.
double pair_support_ratio(std::size_t size_e, std::size_t size_n, std::size_t inter, bool* full = nullptr);

/// Strength ceiling b/(a+b): relations observed less often than this
/// fraction of steps fade out under strength dissolution.
double stealth_threshold(double a, double b);

/// In-memory R_EL / R_LN tables with per-relation strengths.
class RelationStore {
 public:
  /// Appends the rows of an already filtered observation. Rows are set-like
  /// per time stamp. Observations older than the latest one are rejected.
  void ingest(const FloodObservation& obs);

  std::vector<Relation> entity_relations() const;
  std::vector<Relation> node_relations() const;
  std::vector<Relation> pair_relations() const;
  std::vector<Relation> relations(RelationKind kind) const;

  /// The x relations of a kind with the highest raw support, ties by ids.
  std::vector<Relation> top_relations(std::size_t x, RelationKind kind) const;

  /// Removes every row with time < now - timeout.
  void dissolve_timeout(Step now, Step timeout);

  /// One strength update at step `now` (default: latest ingested step).
  /// Relations with rows at `now` gain a, all others lose b; those at or
  /// below zero are dissolved by deleting the rows backing them.
  void dissolve_strength(double a, double b, std::optional<Step> now = std::nullopt);

  /// Keeps only rows backing the top-x e->* and *->n relations.
  void dissolve_topx(std::size_t x);

  const std::set<RowEL>& el_rows() const { return el_; }
  const std::set<RowLN>& ln_rows() const { return ln_; }
  std::optional<Step> latest_step() const { return latest_; }
  double strength(RelationKind kind, EntityId left, NodeId right) const;
  bool empty() const { return el_.empty() && ln_.empty(); }

  void snapshot(std::ostream& out) const;
  static RelationStore restore(std::istream& in);

  /// Table and strength equality; the ordering watermark is not compared.
  bool operator==(const RelationStore& other) const;

 private:
  struct Key {
    RelationKind kind;
    EntityId left;
    NodeId right;
    auto operator<=>(const Key&) const = default;
  };

  std::vector<Step> steps() const;
  void fill_strength(std::vector<Relation>& rels) const;

  std::set<RowEL> el_;
  std::set<RowLN> ln_;
  std::map<Key, double> strength_;
  std::optional<Step> latest_;
};

}  // namespace ariel
