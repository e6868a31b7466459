#include "ariel/report.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <map>
#include <memory>
#include <ostream>
#include <set>

namespace ariel {

namespace {

std::string node_list(const Topology& topo, const Path& p) {
  std::string s;
  for (NodeId n : path_nodes(topo, p)) s += (s.empty() ? "" : " ") + topo.node_name(n);
  return s;
}

std::size_t undirected_links(const Topology& topo) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const Link& l : topo.links()) seen.insert(std::minmax(l.src.value, l.dst.value));
  return seen.size();
}

}  // namespace

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv_header(std::ostream& out, const std::vector<std::string>& coord_keys) {
  for (const std::string& k : coord_keys) out << k << ',';
  out << kCsvColumns << '\n';
}

void write_csv_rows(std::ostream& out, const ExperimentResult& res,
                    const std::vector<std::pair<std::string, std::string>>& coords) {
  std::string prefix;
  for (const auto& [k, v] : coords) prefix += v + ',';
  const auto& names = metric_names();
  for (const RunResult& run : res.runs)
    for (const StepMetrics& m : run.steps)
      for (std::size_t i = 0; i < names.size(); ++i)
        out << prefix << "run," << run.seed << ',' << m.step << ',' << m.ariel_t << ',' << names[i] << ','
            << format_number(metric_value(m, i)) << ",\n";
  for (const AggregateRow& a : res.aggregate)
    out << prefix << "mean,," << a.step << ",," << a.metric << ',' << format_number(a.mean) << ','
        << (a.half_width ? format_number(*a.half_width) : std::string()) << '\n';
}

std::size_t csv_row_count(const ExperimentResult& res) {
  std::size_t n = res.aggregate.size();
  for (const RunResult& run : res.runs) n += run.steps.size() * metric_names().size();
  return n;
}

void write_summary_json(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& res) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json c = ordered_json::object();
  for (const auto& [k, v] : describe(cfg)) c[k] = v;
  j["config"] = c;
  j["columns"] = kCsvColumns;
  j["metrics"] = metric_names();

  ordered_json runs = ordered_json::array();
  for (const RunResult& run : res.runs) {
    ordered_json r;
    r["seed"] = run.seed;
    r["flow_bw"] = run.flow_bw;
    r["steps"] = run.steps.size();
    if (!run.steps.empty()) {
      const StepMetrics& last = run.steps.back();
      ordered_json fin = ordered_json::object();
      for (std::size_t i = 0; i < metric_names().size(); ++i) fin[metric_names()[i]] = metric_value(last, i);
      fin["ariel_t"] = last.ariel_t;
      r["final"] = fin;
    }
    r["relations"] = {{"entity", run.store.entity_relations().size()},
                      {"node", run.store.node_relations().size()},
                      {"pair", run.store.pair_relations().size()}};
    r["pins"] = run.routing.pins.size();
    runs.push_back(r);
  }
  j["runs"] = runs;

  ordered_json fin = ordered_json::object();
  Step horizon = 0;
  for (const AggregateRow& a : res.aggregate) horizon = std::max(horizon, a.step);
  for (const AggregateRow& a : res.aggregate) {
    if (a.step != horizon) continue;
    ordered_json e;
    e["mean"] = a.mean;
    e["half_width"] = a.half_width ? ordered_json(*a.half_width) : ordered_json(nullptr);
    fin[a.metric] = e;
  }
  j["at_horizon"] = fin;
  out << j.dump(2) << '\n';
}

void write_te_dump(std::ostream& out, const Topology& topo, const RunResult& run) {
  out << "# seed " << run.seed << " flow_bw " << format_number(run.flow_bw) << '\n';
  out << "utilization " << format_number(run.fractions.utilization) << (run.fractions.saturated ? " saturated" : "")
      << '\n';
  out << "pins " << run.routing.pins.size() << '\n';
  for (const auto& [pair, p] : run.routing.pins) {
    out << "pin " << topo.node_name(pair.from) << ' ' << topo.node_name(pair.to) << " : " << node_list(topo, p);
    if (auto it = run.routing.pin_triggers.find(pair); it != run.routing.pin_triggers.end() && !it->second.empty()) {
      out << " | on";
      for (LinkId l : it->second)
        out << ' ' << topo.node_name(topo.link(l).src) << "->" << topo.node_name(topo.link(l).dst);
    }
    out << '\n';
  }
  std::map<std::int32_t, std::size_t> per_index;
  for (std::int32_t k : run.routing.path_index)
    if (k >= 0) ++per_index[k];
  out << "flows_per_path_index";
  for (const auto& [k, n] : per_index) out << ' ' << k << ':' << n;
  out << '\n';
  for (const auto& [pair, f] : run.fractions.fractions) {
    auto rit = run.routes.find(pair);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (f[k] <= 0) continue;
      out << "fraction " << topo.node_name(pair.from) << ' ' << topo.node_name(pair.to) << ' ' << k << ' '
          << format_number(f[k]);
      if (rit != run.routes.end() && k < rit->second.size()) out << " : " << node_list(topo, rit->second[k]);
      out << '\n';
    }
  }
  for (const std::string& d : run.routing.diagnostics) out << "diagnostic " << d << '\n';
}

TopoReport topo_report(const std::vector<std::string>& sources, const ExperimentConfig& cfg, std::size_t jobs) {
  TopoReport rep;
  for (const std::string& src : sources) {
    TopoRow row;
    row.source = src;
    try {
      ExperimentConfig c = cfg;
      c.topology = src;
      validate(c);
      auto topo = std::make_shared<const Topology>(load_experiment_topology(c));
      row.name = topo->name.empty() ? src : topo->name;
      row.nodes = topo->node_count();
      row.links = undirected_links(*topo);
      row.avg_spl = avg_shortest_path_length(*topo);
      row.diameter = diameter(*topo);
      ExperimentResult res = run_experiment(topo, c, jobs);
      Step horizon = 0;
      for (const AggregateRow& a : res.aggregate) horizon = std::max(horizon, a.step);
      for (const AggregateRow& a : res.aggregate)
        if (a.step == horizon && a.metric == "delta_s_entity") row.delta_s = a.mean;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rep.rows.push_back(std::move(row));
  }
  std::vector<double> x, y;
  for (const TopoRow& r : rep.rows)
    if (r.error.empty()) x.push_back(r.avg_spl), y.push_back(r.delta_s);
  if (x.size() >= 3) rep.pearson_r = pearson(x, y);
  return rep;
}

void write_topo_csv(std::ostream& out, const TopoReport& report) {
  out << "source,name,nodes,links,avg_spl,diameter,delta_s_entity,error\n";
  auto quoted = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch == '\n' ? ' ' : ch);
    return q + '"';
  };
  for (const TopoRow& r : report.rows) {
    out << quoted(r.source) << ',' << quoted(r.name) << ',';
    if (r.error.empty())
      out << r.nodes << ',' << r.links << ',' << format_number(r.avg_spl) << ',' << r.diameter << ','
          << format_number(r.delta_s) << ",\n";
    else
      out << ",,,,," << quoted(r.error) << '\n';
  }
  out << "pearson_avg_spl_delta_s,,,,,,"
      << (report.pearson_r ? format_number(*report.pearson_r) : std::string("undefined")) << ",\n";
}

}  // namespace ariel
