#include "ariel/relation_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace ariel {

namespace {

const std::set<EntityId> kNoEntities;
const std::set<NodeId> kNoNodes;

template <class T>
bool subset(const std::set<T>& a, const std::set<T>& b) {
  return a.size() <= b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

const std::set<EntityId>& FloodObservation::suspects_of(LinkId l) const {
  auto it = suspects.find(l);
  return it == suspects.end() ? kNoEntities : it->second;
}

const std::set<NodeId>& FloodObservation::nodes_of(LinkId l) const {
  auto it = nodes.find(l);
  return it == nodes.end() ? kNoNodes : it->second;
}

FloodObservation filter_shadowed_links(const FloodObservation& obs) {
  std::vector<LinkId> links(obs.flooded_links.begin(), obs.flooded_links.end());
  FloodObservation out;
  out.time = obs.time;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& ei = obs.suspects_of(links[i]);
    const auto& ni = obs.nodes_of(links[i]);
    bool shadowed = false;
    for (std::size_t j = 0; j < links.size() && !shadowed; ++j) {
      if (i == j) continue;
      const auto& ej = obs.suspects_of(links[j]);
      const auto& nj = obs.nodes_of(links[j]);
      if (!subset(ei, ej) || !subset(ni, nj)) continue;
      bool equal = ei.size() == ej.size() && ni.size() == nj.size();
      shadowed = !equal || j < i;
    }
    if (shadowed) continue;
    out.flooded_links.insert(links[i]);
    if (auto it = obs.suspects.find(links[i]); it != obs.suspects.end()) out.suspects.insert(*it);
    if (auto it = obs.nodes.find(links[i]); it != obs.nodes.end()) out.nodes.insert(*it);
  }
  return out;
}

const char* relation_kind_tag(RelationKind kind) {
  switch (kind) {
    case RelationKind::EntityAny: return "E*";
    case RelationKind::AnyNode: return "*N";
    case RelationKind::EntityNode: return "EN";
  }
  return "?";
}

double pair_support_ratio(std::size_t size_e, std::size_t size_n, std::size_t inter, bool* full) {
  if (full) *full = false;
  if (inter == 0) return 0.0;
  std::size_t denom = size_e + size_n - 2 * inter;  // |∪| - |∩|
  if (denom == 0) {
    if (full) *full = true;
    return static_cast<double>(inter);
  }
  return static_cast<double>(inter) / static_cast<double>(denom);
}

double stealth_threshold(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::Argument, "strength gains must be positive");
  return b / (a + b);
}

// ---------------------------------------------------------------------------

void RelationStore::ingest(const FloodObservation& obs) {
  if (obs.time < 0) throw Error(ErrorCode::Argument, "observation time must be >= 0");
  if (latest_ && obs.time < *latest_) {
    throw Error(ErrorCode::Ordering, "observation at step " + std::to_string(obs.time) +
                                         " is older than the latest ingested step " + std::to_string(*latest_));
  }
  for (const auto& [l, ents] : obs.suspects) {
    if (!obs.flooded_links.count(l)) throw Error(ErrorCode::Argument, "suspect set for a link that is not flooded");
    for (EntityId e : ents) el_.insert(RowEL{e, l, obs.time});
  }
  for (const auto& [l, nodes] : obs.nodes) {
    if (!obs.flooded_links.count(l)) throw Error(ErrorCode::Argument, "node set for a link that is not flooded");
    for (NodeId n : nodes) ln_.insert(RowLN{l, n, obs.time});
  }
  latest_ = obs.time;
}

std::vector<Step> RelationStore::steps() const {
  std::set<Step> s;
  for (const RowEL& r : el_) s.insert(r.time);
  for (const RowLN& r : ln_) s.insert(r.time);
  return {s.begin(), s.end()};
}

namespace {

// |L_A(t)| per step: distinct links with any row at t.
std::map<Step, std::size_t> flooded_per_step(const std::set<RowEL>& el, const std::set<RowLN>& ln) {
  std::map<Step, std::set<LinkId>> links;
  for (const RowEL& r : el) links[r.time].insert(r.link);
  for (const RowLN& r : ln) links[r.time].insert(r.link);
  std::map<Step, std::size_t> out;
  for (const auto& [t, s] : links) out[t] = s.size();
  return out;
}

double log_floor() { return std::log(kSupportFloor); }

double log_term(double s) { return std::log(std::max(s, kSupportFloor)); }

// Shared shape of e->* and *->n: per-side row counts and per-step counts.
template <class Side>
std::vector<Relation> single_side(RelationKind kind, const std::map<Side, std::map<Step, std::uint64_t>>& per_step,
                                  const std::map<Step, std::size_t>& la, const std::vector<Step>& steps,
                                  Step last) {
  std::vector<Relation> out;
  for (const auto& [side, counts] : per_step) {
    Relation r;
    r.kind = kind;
    if constexpr (std::is_same_v<Side, EntityId>) r.left = side;
    else r.right = side;
    r.log_support = static_cast<double>(steps.size()) * log_floor();
    for (const auto& [t, c] : counts) {
      r.support += c;
      double s = static_cast<double>(c) / static_cast<double>(la.at(t));
      r.log_support += log_term(s) - log_floor();
      if (t == last) r.normalized = s;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<Relation> RelationStore::entity_relations() const {
  std::map<EntityId, std::map<Step, std::uint64_t>> per;
  for (const RowEL& r : el_) ++per[r.entity][r.time];
  auto rels = single_side(RelationKind::EntityAny, per, flooded_per_step(el_, ln_), steps(), latest_.value_or(0));
  fill_strength(rels);
  return rels;
}

std::vector<Relation> RelationStore::node_relations() const {
  std::map<NodeId, std::map<Step, std::uint64_t>> per;
  for (const RowLN& r : ln_) ++per[r.node][r.time];
  auto rels = single_side(RelationKind::AnyNode, per, flooded_per_step(el_, ln_), steps(), latest_.value_or(0));
  fill_strength(rels);
  return rels;
}

std::vector<Relation> RelationStore::pair_relations() const {
  if (el_.empty() || ln_.empty()) return {};
  std::uint32_t max_e = 0, max_n = 0, max_l = 0;
  for (const RowEL& r : el_) {
    max_e = std::max(max_e, r.entity.value);
    max_l = std::max(max_l, r.link.value);
  }
  for (const RowLN& r : ln_) {
    max_n = std::max(max_n, r.node.value);
    max_l = std::max(max_l, r.link.value);
  }
  const std::size_t ne = max_e + 1, nn = max_n + 1, nl = max_l + 1;

  // Hash join on the link column: group both tables by link, then every
  // (entity row, node row) combination on the same link is one joined row.
  std::vector<std::unordered_map<std::uint32_t, std::uint64_t>> ents_on(nl), nodes_on(nl);
  for (const RowEL& r : el_) ++ents_on[r.link.value][r.entity.value];
  for (const RowLN& r : ln_) ++nodes_on[r.link.value][r.node.value];

  std::vector<std::uint64_t> support(ne * nn, 0);
  for (std::size_t l = 0; l < nl; ++l) {
    if (ents_on[l].empty() || nodes_on[l].empty()) continue;
    for (const auto& [e, ce] : ents_on[l])
      for (const auto& [n, cn] : nodes_on[l]) support[e * nn + n] += ce * cn;
  }

  // Per-step overlap |L_e(t) ∩ L_n(t)| via the join restricted to one time stamp.
  auto all_steps = steps();
  // A quiet latest round leaves every per-step value at zero.
  Step last = latest_.value_or(0);
  std::vector<double> log_sum(ne * nn, static_cast<double>(all_steps.size()) * log_floor());
  std::vector<double> latest(ne * nn, 0.0);
  std::vector<char> full(ne * nn, 0);

  std::map<Step, std::vector<const RowEL*>> el_at;
  std::map<Step, std::vector<const RowLN*>> ln_at;
  for (const RowEL& r : el_) el_at[r.time].push_back(&r);
  for (const RowLN& r : ln_) ln_at[r.time].push_back(&r);

  std::vector<std::uint32_t> inter(ne * nn, 0);
  for (Step t : all_steps) {
    auto ie = el_at.find(t);
    auto in = ln_at.find(t);
    if (ie == el_at.end() || in == ln_at.end()) continue;
    std::vector<std::uint32_t> size_e(ne, 0), size_n(nn, 0);
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> e_by_link, n_by_link;
    for (const RowEL* r : ie->second) {
      ++size_e[r->entity.value];
      e_by_link[r->link.value].push_back(r->entity.value);
    }
    for (const RowLN* r : in->second) {
      ++size_n[r->node.value];
      n_by_link[r->link.value].push_back(r->node.value);
    }
    std::vector<std::size_t> touched;
    for (const auto& [l, es] : e_by_link) {
      auto nit = n_by_link.find(l);
      if (nit == n_by_link.end()) continue;
      for (std::uint32_t e : es)
        for (std::uint32_t n : nit->second) {
          std::size_t idx = e * nn + n;
          if (inter[idx]++ == 0) touched.push_back(idx);
        }
    }
    for (std::size_t idx : touched) {
      bool f = false;
      double s = pair_support_ratio(size_e[idx / nn], size_n[idx % nn], inter[idx], &f);
      log_sum[idx] += log_term(s) - log_floor();
      if (t == last) {
        latest[idx] = s;
        full[idx] = f;
      }
      inter[idx] = 0;
    }
  }

  std::vector<Relation> out;
  for (std::size_t idx = 0; idx < support.size(); ++idx) {
    if (support[idx] == 0) continue;
    Relation r;
    r.kind = RelationKind::EntityNode;
    r.left = EntityId{static_cast<std::uint32_t>(idx / nn)};
    r.right = NodeId{static_cast<std::uint32_t>(idx % nn)};
    r.support = support[idx];
    r.normalized = latest[idx];
    r.log_support = log_sum[idx];
    r.full_support = full[idx] != 0;
    out.push_back(r);
  }
  fill_strength(out);
  return out;
}

std::vector<Relation> RelationStore::relations(RelationKind kind) const {
  switch (kind) {
    case RelationKind::EntityAny: return entity_relations();
    case RelationKind::AnyNode: return node_relations();
    case RelationKind::EntityNode: return pair_relations();
  }
  return {};
}

std::vector<Relation> RelationStore::top_relations(std::size_t x, RelationKind kind) const {
  if (x == 0) throw Error(ErrorCode::Argument, "top-x needs x >= 1");
  auto rels = relations(kind);
  std::stable_sort(rels.begin(), rels.end(), [](const Relation& a, const Relation& b) {
    if (a.support != b.support) return a.support > b.support;
    return std::tie(a.left, a.right) < std::tie(b.left, b.right);
  });
  if (rels.size() > x) rels.resize(x);
  return rels;
}

void RelationStore::fill_strength(std::vector<Relation>& rels) const {
  for (Relation& r : rels) {
    auto it = strength_.find(Key{r.kind, r.left, r.right});
    r.strength = it == strength_.end() ? 0.0 : it->second;
  }
}

double RelationStore::strength(RelationKind kind, EntityId left, NodeId right) const {
  auto it = strength_.find(Key{kind, left, right});
  return it == strength_.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------
// Dissolution

void RelationStore::dissolve_timeout(Step now, Step timeout) {
  if (timeout < 1) throw Error(ErrorCode::Argument, "timeout must be >= 1");
  const Step cutoff = now - timeout;
  std::erase_if(el_, [cutoff](const RowEL& r) { return r.time < cutoff; });
  std::erase_if(ln_, [cutoff](const RowLN& r) { return r.time < cutoff; });
}

void RelationStore::dissolve_strength(double a, double b, std::optional<Step> now) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::Argument, "strength gains must be positive");
  if (!now) now = latest_;
  if (!now) return;

  // Which relations exist, and which of them have rows at `now`.
  std::set<Key> existing;
  std::set<Key> observed;
  for (const RowEL& r : el_) {
    Key k{RelationKind::EntityAny, r.entity, NodeId{}};
    existing.insert(k);
    if (r.time == *now) observed.insert(k);
  }
  for (const RowLN& r : ln_) {
    Key k{RelationKind::AnyNode, EntityId{}, r.node};
    existing.insert(k);
    if (r.time == *now) observed.insert(k);
  }
  for (const Relation& r : pair_relations()) existing.insert(Key{r.kind, r.left, r.right});
  {
    std::map<LinkId, std::vector<EntityId>> e_now;
    std::map<LinkId, std::vector<NodeId>> n_now;
    for (const RowEL& r : el_)
      if (r.time == *now) e_now[r.link].push_back(r.entity);
    for (const RowLN& r : ln_)
      if (r.time == *now) n_now[r.link].push_back(r.node);
    for (const auto& [l, es] : e_now) {
      auto it = n_now.find(l);
      if (it == n_now.end()) continue;
      for (EntityId e : es)
        for (NodeId n : it->second) observed.insert(Key{RelationKind::EntityNode, e, n});
    }
  }

  std::erase_if(strength_, [&](const auto& kv) { return !existing.count(kv.first); });

  std::vector<Key> dissolved;
  for (const Key& k : existing) {
    double& g = strength_[k];
    g += observed.count(k) ? a : -b;
    if (g <= 0.0) dissolved.push_back(k);
  }

  std::map<NodeId, std::set<LinkId>> links_of_node;
  for (const RowLN& r : ln_) links_of_node[r.node].insert(r.link);

  std::set<EntityId> drop_entities;
  std::set<NodeId> drop_nodes;
  std::set<std::pair<EntityId, LinkId>> drop_entity_links;
  for (const Key& k : dissolved) {
    strength_.erase(k);
    switch (k.kind) {
      case RelationKind::EntityAny: drop_entities.insert(k.left); break;
      case RelationKind::AnyNode: drop_nodes.insert(k.right); break;
      case RelationKind::EntityNode:
        for (LinkId l : links_of_node[k.right]) drop_entity_links.insert({k.left, l});
        break;
    }
  }
  std::erase_if(el_, [&](const RowEL& r) {
    return drop_entities.count(r.entity) || drop_entity_links.count({r.entity, r.link});
  });
  std::erase_if(ln_, [&](const RowLN& r) { return drop_nodes.count(r.node) != 0; });
}

void RelationStore::dissolve_topx(std::size_t x) {
  std::set<EntityId> keep_e;
  std::set<NodeId> keep_n;
  for (const Relation& r : top_relations(x, RelationKind::EntityAny)) keep_e.insert(r.left);
  for (const Relation& r : top_relations(x, RelationKind::AnyNode)) keep_n.insert(r.right);
  std::erase_if(el_, [&](const RowEL& r) { return !keep_e.count(r.entity); });
  std::erase_if(ln_, [&](const RowLN& r) { return !keep_n.count(r.node); });
}

bool RelationStore::operator==(const RelationStore& other) const {
  return el_ == other.el_ && ln_ == other.ln_ && strength_ == other.strength_;
}

// ---------------------------------------------------------------------------
// Snapshot

void RelationStore::snapshot(std::ostream& out) const {
  for (const RowEL& r : el_) out << "EL " << r.entity.value << ' ' << r.link.value << ' ' << r.time << '\n';
  for (const RowLN& r : ln_) out << "LN " << r.link.value << ' ' << r.node.value << ' ' << r.time << '\n';
  char buf[64];
  for (const auto& [k, g] : strength_) {
    std::snprintf(buf, sizeof buf, "%.17g", g);
    out << "STR " << relation_kind_tag(k.kind) << ' ';
    if (k.left.valid()) out << k.left.value;
    else out << '*';
    out << ' ';
    if (k.right.valid()) out << k.right.value;
    else out << '*';
    out << ' ' << buf << '\n';
  }
}

namespace {

[[noreturn]] void corrupt(std::size_t line, const std::string& why) {
  throw Error(ErrorCode::Format, "corrupt snapshot at line " + std::to_string(line) + ": " + why);
}

std::uint32_t read_id(std::istringstream& in, std::size_t line, bool wildcard_ok, bool* wildcard = nullptr) {
  std::string tok;
  if (!(in >> tok)) corrupt(line, "missing field");
  if (tok == "*") {
    if (!wildcard_ok) corrupt(line, "unexpected wildcard");
    if (wildcard) *wildcard = true;
    return 0;
  }
  if (wildcard) *wildcard = false;
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &used);
  } catch (const std::exception&) {
    corrupt(line, "bad id '" + tok + "'");
  }
  if (used != tok.size() || tok[0] == '-' || v >= 0xffffffffUL) corrupt(line, "bad id '" + tok + "'");
  return static_cast<std::uint32_t>(v);
}

Step read_step(std::istringstream& in, std::size_t line) {
  std::string tok;
  if (!(in >> tok)) corrupt(line, "missing time");
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    corrupt(line, "bad time '" + tok + "'");
  }
  if (used != tok.size() || v < 0) corrupt(line, "bad time '" + tok + "'");
  return v;
}

}  // namespace

RelationStore RelationStore::restore(std::istream& in) {
  RelationStore store;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ls(text);
    std::string tag;
    ls >> tag;
    if (tag == "EL") {
      EntityId e{read_id(ls, line, false)};
      LinkId l{read_id(ls, line, false)};
      Step t = read_step(ls, line);
      store.el_.insert(RowEL{e, l, t});
      store.latest_ = std::max(store.latest_.value_or(t), t);
    } else if (tag == "LN") {
      LinkId l{read_id(ls, line, false)};
      NodeId n{read_id(ls, line, false)};
      Step t = read_step(ls, line);
      store.ln_.insert(RowLN{l, n, t});
      store.latest_ = std::max(store.latest_.value_or(t), t);
    } else if (tag == "STR") {
      std::string kind;
      ls >> kind;
      Key k{};
      if (kind == "E*") k.kind = RelationKind::EntityAny;
      else if (kind == "*N") k.kind = RelationKind::AnyNode;
      else if (kind == "EN") k.kind = RelationKind::EntityNode;
      else corrupt(line, "unknown relation kind '" + kind + "'");
      bool wl = false, wr = false;
      std::uint32_t left = read_id(ls, line, true, &wl);
      std::uint32_t right = read_id(ls, line, true, &wr);
      if (wl != (k.kind == RelationKind::AnyNode) || wr != (k.kind == RelationKind::EntityAny))
        corrupt(line, "wildcards do not match relation kind");
      k.left = wl ? EntityId{} : EntityId{left};
      k.right = wr ? NodeId{} : NodeId{right};
      std::string g;
      if (!(ls >> g)) corrupt(line, "missing strength");
      char* end = nullptr;
      double v = std::strtod(g.c_str(), &end);
      if (*end != '\0' || !std::isfinite(v) || v < 0) corrupt(line, "bad strength '" + g + "'");
      store.strength_[k] = v;
    } else {
      corrupt(line, "unknown row type '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) corrupt(line, "trailing field '" + extra + "'");
  }
  return store;
}

}  // namespace ariel
