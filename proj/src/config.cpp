#include "ariel/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace ariel {

namespace {

Error bad(std::string_view key, const std::string& why) {
  return Error(ErrorCode::Config, "config key '" + std::string(key) + "': " + why);
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto a = s.find_first_not_of(ws);
  if (a == std::string_view::npos) return {};
  auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size()) throw bad(key, "expected a number, got '" + std::string(v) + "'");
  return x;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw bad(key, "expected a nonnegative integer, got '" + std::string(v) + "'");
  return x;
}

bool to_bool(std::string_view key, std::string_view v) {
  std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw bad(key, "expected true or false, got '" + std::string(v) + "'");
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// "1,2,3" or "1..5" or a mix.
std::vector<std::uint64_t> to_seeds(std::string_view key, std::string_view v) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(v)) {
    auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_uint(key, item));
      continue;
    }
    std::uint64_t a = to_uint(key, trim(std::string_view(item).substr(0, dots)));
    std::uint64_t b = to_uint(key, trim(std::string_view(item).substr(dots + 2)));
    if (b < a || b - a > 100000) throw bad(key, "bad seed range '" + item + "'");
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  }
  if (out.empty()) throw bad(key, "no seeds");
  return out;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Field uint_field(const char* key, T ExperimentConfig::*m) {
  return {key, [key, m](ExperimentConfig& c, std::string_view v) { c.*m = static_cast<T>(to_uint(key, v)); },
          [m](const ExperimentConfig& c) { return std::to_string(c.*m); }};
}

Field real_field(const char* key, double ExperimentConfig::*m) {
  return {key, [key, m](ExperimentConfig& c, std::string_view v) { c.*m = to_double(key, v); },
          [m](const ExperimentConfig& c) { return num(c.*m); }};
}

Field bool_field(const char* key, bool ExperimentConfig::*m) {
  return {key, [key, m](ExperimentConfig& c, std::string_view v) { c.*m = to_bool(key, v); },
          [m](const ExperimentConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field text_field(const char* key, std::string ExperimentConfig::*m) {
  return {key, [m](ExperimentConfig& c, std::string_view v) { c.*m = std::string(v); },
          [m](const ExperimentConfig& c) { return c.*m; }};
}

template <class E>
Field enum_field(const char* key, E ExperimentConfig::*m, std::vector<std::pair<const char*, E>> names) {
  return {key,
          [key, m, names](ExperimentConfig& c, std::string_view v) {
            std::string s = lower(v);
            std::string all;
            for (const auto& [n, e] : names) {
              if (s == n) {
                c.*m = e;
                return;
              }
              all += all.empty() ? n : std::string("|") + n;
            }
            throw bad(key, "expected " + all + ", got '" + std::string(v) + "'");
          },
          [m, names](const ExperimentConfig& c) {
            for (const auto& [n, e] : names)
              if (c.*m == e) return std::string(n);
            return std::string("?");
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      text_field("topology", &ExperimentConfig::topology),
      real_field("capacity", &ExperimentConfig::capacity),
      uint_field("bots", &ExperimentConfig::bots),
      uint_field("benign", &ExperimentConfig::benign),
      uint_field("max_conns", &ExperimentConfig::max_conns),
      {"flow_bw",
       [](ExperimentConfig& c, std::string_view v) {
         if (lower(v) == "auto")
           c.flow_bw.reset();
         else
           c.flow_bw = to_double("flow_bw", v);
       },
       [](const ExperimentConfig& c) { return c.flow_bw ? num(*c.flow_bw) : std::string("auto"); }},
      real_field("flow_bw_scale", &ExperimentConfig::flow_bw_scale),
      real_field("calibrate_min", &ExperimentConfig::calibrate_min),
      real_field("calibrate_max", &ExperimentConfig::calibrate_max),
      real_field("reuse_ratio", &ExperimentConfig::reuse_ratio),
      real_field("rehome_ratio", &ExperimentConfig::rehome_ratio),
      {"horizon",
       [](ExperimentConfig& c, std::string_view v) { c.horizon = static_cast<Step>(to_uint("horizon", v)); },
       [](const ExperimentConfig& c) { return std::to_string(c.horizon); }},
      enum_field("mapping", &ExperimentConfig::mapping, {{"random", Mapping::Random}, {"optimal", Mapping::Optimal}}),
      enum_field("dissolution", &ExperimentConfig::dissolution,
                 {{"none", Dissolution::None},
                  {"timeout", Dissolution::Timeout},
                  {"strength", Dissolution::Strength},
                  {"top_x", Dissolution::TopX}}),
      {"timeout",
       [](ExperimentConfig& c, std::string_view v) { c.timeout = static_cast<Step>(to_uint("timeout", v)); },
       [](const ExperimentConfig& c) { return std::to_string(c.timeout); }},
      real_field("strength_a", &ExperimentConfig::strength_a),
      real_field("strength_b", &ExperimentConfig::strength_b),
      uint_field("top_x", &ExperimentConfig::top_x),
      real_field("threshold", &ExperimentConfig::threshold),
      {"seeds", [](ExperimentConfig& c, std::string_view v) { c.seeds = to_seeds("seeds", v); },
       [](const ExperimentConfig& c) {
         std::string s;
         for (auto x : c.seeds) s += (s.empty() ? "" : ",") + std::to_string(x);
         return s;
       }},
      uint_field("k_paths", &ExperimentConfig::k_paths),
      enum_field("attack_mode", &ExperimentConfig::attack_mode,
                 {{"vertical", AttackMode::Vertical},
                  {"efferent", AttackMode::HorizontalEfferent},
                  {"afferent", AttackMode::HorizontalAfferent}}),
      uint_field("attack_budget", &ExperimentConfig::attack_budget),
      bool_field("attacker_any_path", &ExperimentConfig::attacker_any_path),
      uint_field("pin_targets", &ExperimentConfig::pin_targets),
      enum_field("popularity", &ExperimentConfig::popularity,
                 {{"uniform", Popularity::Uniform}, {"zipf", Popularity::Zipf}}),
      real_field("zipf_s", &ExperimentConfig::zipf_s),
      bool_field("benign_first", &ExperimentConfig::benign_first),
      uint_field("max_failed_waves", &ExperimentConfig::max_failed_waves),
      bool_field("prepin_target", &ExperimentConfig::prepin_target),
      text_field("origin", &ExperimentConfig::origin),
      text_field("target", &ExperimentConfig::target),
  };
  return f;
}

const Field* find_field(std::string_view key) {
  for (const Field& f : fields())
    if (key == f.key) return &f;
  return nullptr;
}

// Built-in topologies look like "grid:5"; anything else is a file.
bool is_file_topology(const std::string& t) {
  auto colon = t.find(':');
  if (colon == std::string::npos) return true;
  std::string kind = t.substr(0, colon);
  return !(kind == "grid" || kind == "mesh" || kind == "ring" || kind == "line");
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = trim(text.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (!f) throw bad(key, "unknown key");
  value = trim(value);
  if (value.empty() && key != "origin" && key != "target") throw bad(key, "empty value");
  f->set(cfg, value);
}

std::vector<std::pair<std::string, std::string>> describe(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(cfg));
  return out;
}

BatchSpec parse_batch(std::string_view text, const std::filesystem::path& dir) {
  // Absolute, so paths resolved here are not joined with the directory again at load time.
  const std::filesystem::path base_dir = dir.empty() ? dir : std::filesystem::absolute(dir).lexically_normal();
  BatchSpec spec;
  spec.base.base_dir = base_dir.string();
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": bad section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section != "sweep" && section != "experiment")
        throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": unknown section '" + section + "'");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected key = value");
    std::string key = lower(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": missing key");

    if (section == "sweep") {
      if (!find_field(key)) throw bad(key, "unknown key");
      if (key == "seeds") throw bad(key, "seeds cannot be swept; list them in the base section");
      SweepAxis axis{key, split_list(value)};
      if (axis.values.empty()) throw bad(key, "sweep axis has no values");
      ExperimentConfig probe = spec.base;
      for (const std::string& v : axis.values) {
        apply_setting(probe, key, v);
        validate(probe);
      }
      auto dup = std::find_if(spec.axes.begin(), spec.axes.end(), [&](const SweepAxis& a) { return a.key == key; });
      if (dup != spec.axes.end()) throw bad(key, "sweep axis given twice");
      spec.axes.push_back(std::move(axis));
    } else if (key == "topologies") {
      spec.topologies = split_list(value);
    } else if (key == "out") {
      spec.out_dir = std::string(value);
    } else {
      apply_setting(spec.base, key, value);
    }
  }
  if (!base_dir.empty()) {
    if (!spec.out_dir.empty() && std::filesystem::path(spec.out_dir).is_relative())
      spec.out_dir = (base_dir / spec.out_dir).lexically_normal().string();
    for (std::string& t : spec.topologies)
      if (is_file_topology(t) && std::filesystem::path(t).is_relative()) t = (base_dir / t).lexically_normal().string();
  }
  return spec;
}

BatchSpec load_batch(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_batch(ss.str(), file.parent_path());
}

std::vector<SweepCell> expand_sweep(const BatchSpec& spec) {
  std::vector<SweepCell> cells{SweepCell{{}, spec.base}};
  for (const SweepAxis& axis : spec.axes) {
    std::vector<SweepCell> next;
    for (const SweepCell& c : cells)
      for (const std::string& v : axis.values) {
        SweepCell n = c;
        n.coords.emplace_back(axis.key, v);
        apply_setting(n.cfg, axis.key, v);
        next.push_back(std::move(n));
      }
    cells = std::move(next);
  }
  return cells;
}

}  // namespace ariel
