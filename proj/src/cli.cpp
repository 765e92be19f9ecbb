#include "fanet/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"

namespace fanet::cli {

namespace {

using Json = nlohmann::json;

double number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key + ": must be finite");
  return x;
}

std::uint64_t whole(const Json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(key + ": must be >= 0");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(key + ": expected a non-negative integer");
}

std::string text(const Json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

Weights weights_from(const Json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(key + ": expected [w1, w2, w3]");
  try {
    return Weights(number(v[0], key), number(v[1], key), number(v[2], key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

FlowSpec flow_from(const Json& v, std::size_t index) {
  const std::string where = "flow_list[" + std::to_string(index) + "]";
  if (!v.is_object()) throw ConfigError(where + ": expected an object");
  FlowSpec f;
  f.id = static_cast<std::uint32_t>(index);
  bool has_src = false;
  bool has_dst = false;
  for (const auto& [key, value] : v.items()) {
    const std::string field = where + "." + key;
    if (key == "src") {
      f.src = static_cast<NodeId>(whole(value, field));
      has_src = true;
    } else if (key == "dst") {
      f.dst = static_cast<NodeId>(whole(value, field));
      has_dst = true;
    } else if (key == "file_size") {
      f.file_size = number(value, field);
    } else if (key == "start") {
      f.start_time = number(value, field);
    } else {
      throw ConfigError(field + ": unknown key");
    }
  }
  if (!has_src || !has_dst) throw ConfigError(where + ": src and dst are required");
  return f;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt_double(double x) { return fmt::format("{}", x); }

double parse_double(std::string_view s, const std::string& what) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw IoError("bad number in column '" + what + "': '" + std::string(s) + "'");
  }
  return x;
}

std::uint64_t parse_uint(std::string_view s, const std::string& what) {
  std::uint64_t x = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw IoError("bad integer in column '" + what + "': '" + std::string(s) + "'");
  }
  return x;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

template <typename Result, typename Fn>
std::vector<Result> parallel_cells(std::size_t count, unsigned jobs, Fn&& cell) {
  std::vector<Result> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        out[k] = cell(k);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

constexpr std::string_view kRowHeader =
    "router,w1,w2,w3,replication,seed,flows,success_rate,mean_throughput_mbps,"
    "weighted_throughput_mbps,mean_fct,mean_fct_success,reroutes";

}  // namespace

ScenarioConfig parse_config(std::string_view text_in, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text_in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  ScenarioConfig cfg;
  std::optional<Weights> weights;
  std::vector<std::string> router_names{"lb_opar", "opar", "reactive_hop", "proactive_hop"};
  Objective objective = Objective::bottleneck;
  double proactive_period = 10.0;
  bool nodes_given = false;

  for (const auto& [key, v] : doc.items()) {
    if (key == "nodes") {
      cfg.node_count = whole(v, key);
      nodes_given = true;
    } else if (key == "arena_x") {
      cfg.arena.x_max = number(v, key);
    } else if (key == "arena_y") {
      cfg.arena.y_max = number(v, key);
    } else if (key == "arena_z") {
      cfg.arena.z_max = number(v, key);
    } else if (key == "mobility") {
      try {
        cfg.mobility.model = parse_mobility_model(text(v, key));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
      }
    } else if (key == "speed_min") {
      cfg.mobility.speed_min = number(v, key);
    } else if (key == "speed_max") {
      cfg.mobility.speed_max = number(v, key);
    } else if (key == "pause") {
      cfg.mobility.pause = number(v, key);
    } else if (key == "gm_alpha") {
      cfg.mobility.gm_alpha = number(v, key);
    } else if (key == "gm_update") {
      cfg.mobility.gm_update = number(v, key);
    } else if (key == "trace_file") {
      cfg.trace_file = text(v, key);
    } else if (key == "flows") {
      cfg.flow_rule.count = whole(v, key);
    } else if (key == "file_size") {
      cfg.flow_rule.file_size = number(v, key);
    } else if (key == "flow_start") {
      cfg.flow_rule.start = number(v, key);
    } else if (key == "flow_start_spread") {
      cfg.flow_rule.start_spread = number(v, key);
    } else if (key == "flow_list") {
      if (!v.is_array()) throw ConfigError(key + ": expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) cfg.flows.push_back(flow_from(v[i], i));
    } else if (key == "routers") {
      if (!v.is_array() || v.empty()) throw ConfigError(key + ": expected a non-empty array");
      router_names.clear();
      for (const auto& r : v) router_names.push_back(text(r, key));
    } else if (key == "weights") {
      if (v.is_string() && v.get<std::string>() == "table") {
        weights.reset();
      } else {
        weights = weights_from(v, key);
      }
    } else if (key == "objective") {
      const std::string o = text(v, key);
      if (o == "bottleneck") {
        objective = Objective::bottleneck;
      } else if (o == "blp") {
        objective = Objective::blp;
      } else {
        throw ConfigError(key + ": expected \"bottleneck\" or \"blp\"");
      }
    } else if (key == "proactive_period") {
      proactive_period = number(v, key);
    } else if (key == "range") {
      cfg.range = number(v, key);
    } else if (key == "channel_rate") {
      cfg.channel_rate = number(v, key);
    } else if (key == "duration") {
      cfg.duration = number(v, key);
    } else if (key == "tick") {
      cfg.tick = number(v, key);
    } else if (key == "reroute_delay") {
      cfg.reroute_delay = number(v, key);
    } else if (key == "tau_cutoff") {
      cfg.tau_cutoff = number(v, key);
    } else if (key == "bisection_tol") {
      cfg.bisection_tol = number(v, key);
    } else if (key == "replications") {
      cfg.replications = whole(v, key);
    } else if (key == "seed") {
      cfg.seed = whole(v, key);
    } else if (key == "warmup") {
      cfg.prediction.warmup = number(v, key);
    } else if (key == "observe") {
      cfg.prediction.observe = number(v, key);
    } else if (key == "prediction_runs") {
      cfg.prediction.runs = whole(v, key);
    } else {
      throw ConfigError(key + ": unknown key");
    }
  }

  if (!cfg.trace_file.empty()) {
    std::filesystem::path p(cfg.trace_file);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    std::ifstream in(p);
    if (!in) throw IoError("trace_file: cannot open " + p.string());
    try {
      cfg.trace = read_trace(in);
    } catch (const std::runtime_error& e) {
      throw ConfigError(std::string("trace_file: ") + e.what());
    }
    if (!nodes_given) cfg.node_count = cfg.trace.size();
  }

  for (const std::string& name : router_names) {
    RouterKind kind;
    try {
      kind.family = parse_router_family(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("routers: ") + e.what());
    }
    kind.weights = weights;
    kind.objective = objective;
    kind.refresh_period = proactive_period;
    cfg.routers.push_back(kind);
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::vector<Weights> parse_grid(std::string_view spec) {
  std::vector<Weights> grid;
  try {
    if (spec == "w3") {
      for (int k = 0; k <= 10; ++k) {
        const double w3 = k / 10.0;
        const double half = (1.0 - w3) / 2.0;
        grid.emplace_back(half, 1.0 - w3 - half, w3);
      }
      return grid;
    }
    if (spec.starts_with("w1w2:")) {
      const double w3 = parse_double(spec.substr(5), "grid");
      if (w3 < 0.0 || w3 > 1.0) throw ConfigError("grid: w3 must be in [0, 1]");
      const int steps = static_cast<int>(std::floor((1.0 - w3) * 10.0 + 1e-9));
      for (int k = 0; k <= steps; ++k) {
        const double w1 = k / 10.0;
        grid.emplace_back(w1, std::max(0.0, 1.0 - w3 - w1), w3);
      }
      return grid;
    }
    for (const auto point : split(spec, ';')) {
      const auto parts = split(point, ',');
      if (parts.size() != 3) throw ConfigError("grid: each point needs three weights");
      grid.emplace_back(parse_double(trim(parts[0]), "grid"), parse_double(trim(parts[1]), "grid"),
                        parse_double(trim(parts[2]), "grid"));
    }
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (grid.empty()) throw ConfigError("grid: no points");
  return grid;
}

std::vector<RouterKind> parse_router_list(std::string_view list, const ScenarioConfig& base) {
  RouterKind proto = base.routers.empty() ? RouterKind{} : base.routers.front();
  std::vector<RouterKind> out;
  for (const auto name : split(list, ',')) {
    RouterKind kind = proto;
    try {
      kind.family = parse_router_family(trim(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--routers: ") + e.what());
    }
    out.push_back(kind);
  }
  return out;
}

std::vector<MetricsReport> run_replications(const ScenarioConfig& cfg, std::uint64_t base_seed,
                                            unsigned jobs) {
  return parallel_cells<MetricsReport>(cfg.replications, jobs,
                                       [&](std::size_t r) { return run(cfg, base_seed + r); });
}

std::vector<PredictionRun> run_predictions(const ScenarioConfig& cfg, std::uint64_t base_seed,
                                           unsigned jobs) {
  return parallel_cells<PredictionRun>(cfg.prediction.runs, jobs, [&](std::size_t r) {
    return evaluate_prediction(cfg, base_seed + r);
  });
}

std::vector<ResultRow> to_rows(const std::vector<MetricsReport>& reports) {
  std::vector<ResultRow> rows;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    for (const RouterMetrics& m : reports[r].routers) {
      ResultRow row;
      row.router = m.router;
      row.w1 = m.weights.length();
      row.w2 = m.weights.lifetime();
      row.w3 = m.weights.load();
      row.replication = r;
      row.seed = reports[r].seed;
      row.flows = m.flows.size();
      row.success_rate = m.success_rate;
      row.mean_throughput_mbps = m.mean_throughput_mbps;
      row.weighted_throughput_mbps = m.weighted_throughput_mbps;
      row.mean_fct = m.mean_fct;
      row.mean_fct_success = m.mean_fct_success;
      row.reroutes = m.reroutes;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_rows(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kRowHeader << '\n';
  for (const ResultRow& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.router, fmt_double(r.w1),
               fmt_double(r.w2), fmt_double(r.w3), r.replication, r.seed, r.flows,
               fmt_double(r.success_rate), fmt_double(r.mean_throughput_mbps),
               fmt_double(r.weighted_throughput_mbps), fmt_double(r.mean_fct),
               r.mean_fct_success ? fmt_double(*r.mean_fct_success) : std::string(), r.reroutes);
  }
}

std::vector<ResultRow> read_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRowHeader) throw IoError("unexpected result header");
  const auto names = split(kRowHeader, ',');
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != names.size()) throw IoError("wrong column count in '" + line + "'");
    ResultRow r;
    r.router = std::string(f[0]);
    r.w1 = parse_double(f[1], "w1");
    r.w2 = parse_double(f[2], "w2");
    r.w3 = parse_double(f[3], "w3");
    r.replication = parse_uint(f[4], "replication");
    r.seed = parse_uint(f[5], "seed");
    r.flows = parse_uint(f[6], "flows");
    r.success_rate = parse_double(f[7], "success_rate");
    r.mean_throughput_mbps = parse_double(f[8], "mean_throughput_mbps");
    r.weighted_throughput_mbps = parse_double(f[9], "weighted_throughput_mbps");
    r.mean_fct = parse_double(f[10], "mean_fct");
    if (!f[11].empty()) r.mean_fct_success = parse_double(f[11], "mean_fct_success");
    r.reroutes = parse_uint(f[12], "reroutes");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_flow_rows(std::ostream& out, const std::vector<MetricsReport>& reports) {
  out << "router,w1,w2,w3,replication,seed,flow,src,dst,file_size,start,bytes_delivered,"
         "reroutes,success,completion_time,fct\n";
  for (std::size_t r = 0; r < reports.size(); ++r) {
    for (const RouterMetrics& m : reports[r].routers) {
      for (const FlowRecord& f : m.flows) {
        fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", m.router,
                   fmt_double(m.weights.length()), fmt_double(m.weights.lifetime()),
                   fmt_double(m.weights.load()), r, reports[r].seed, f.spec.id, f.spec.src,
                   f.spec.dst, fmt_double(f.spec.file_size), fmt_double(f.spec.start_time),
                   fmt_double(f.bytes_delivered), f.reroutes, f.success ? 1 : 0,
                   f.completion_time ? fmt_double(*f.completion_time) : std::string(),
                   fmt_double(f.fct));
      }
    }
  }
}

std::vector<SweepPoint> aggregate_sweep(const std::vector<Weights>& grid,
                                        const std::vector<ResultRow>& rows) {
  std::vector<SweepPoint> points;
  for (const Weights& w : grid) {
    SweepPoint p;
    p.weights = w;
    std::size_t n = 0;
    for (const ResultRow& r : rows) {
      if (r.w1 != w.length() || r.w2 != w.lifetime() || r.w3 != w.load()) continue;
      p.success_rate += r.success_rate;
      p.weighted_throughput_mbps += r.weighted_throughput_mbps;
      p.mean_fct += r.mean_fct;
      ++n;
    }
    if (n > 0) {
      p.success_rate /= static_cast<double>(n);
      p.weighted_throughput_mbps /= static_cast<double>(n);
      p.mean_fct /= static_cast<double>(n);
    }
    points.push_back(p);
  }
  return points;
}

std::size_t best_point(const std::vector<SweepPoint>& points) {
  if (points.empty()) throw std::invalid_argument("best_point: empty sweep");
  std::size_t best = 0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const SweepPoint& a = points[k];
    const SweepPoint& b = points[best];
    if (a.mean_fct != b.mean_fct) {
      if (a.mean_fct < b.mean_fct) best = k;
    } else if (a.success_rate != b.success_rate) {
      if (a.success_rate > b.success_rate) best = k;
    } else if (a.weights.load() < b.weights.load()) {
      best = k;
    }
  }
  return best;
}

SweepOutcome sweep_weights(ScenarioConfig cfg, const std::vector<Weights>& grid,
                           std::uint64_t base_seed, unsigned jobs) {
  RouterKind proto = cfg.routers.empty() ? RouterKind{} : cfg.routers.front();
  proto.family = RouterFamily::lb_opar;
  cfg.routers.clear();
  for (const Weights& w : grid) {
    RouterKind k = proto;
    k.weights = w;
    cfg.routers.push_back(k);
  }
  SweepOutcome out;
  out.rows = to_rows(run_replications(cfg, base_seed, jobs));
  out.points = aggregate_sweep(grid, out.rows);
  out.best = best_point(out.points);
  return out;
}

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string routers;
  std::string grid = "w3";
};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void close_out(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw IoError("write failed for " + path.string());
}

std::filesystem::path sibling(const std::filesystem::path& out, std::string_view suffix) {
  std::filesystem::path p = out;
  p.replace_extension();
  p += suffix;
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json meta_base(std::string_view command, const Options& o, const std::string& config_text,
               std::uint64_t base_seed, std::size_t cells) {
  Json meta;
  meta["tool"] = "fanet";
  meta["version"] = std::string(kVersion);
  meta["command"] = std::string(command);
  meta["config"] = o.config;
  meta["config_hash"] = fmt::format("fnv1a64:{:016x}", fnv1a(config_text));
  meta["base_seed"] = base_seed;
  Json seeds = Json::array();
  for (std::size_t r = 0; r < cells; ++r) seeds.push_back(base_seed + r);
  meta["seeds"] = seeds;
  return meta;
}

void write_meta(const std::filesystem::path& out, const Json& meta) {
  const auto path = sibling(out, ".meta.json");
  auto f = open_out(path);
  f << meta.dump(2) << '\n';
  close_out(f, path);
}

ScenarioConfig prepare(const Options& o, std::string& config_text) {
  config_text = read_file(o.config);
  ScenarioConfig cfg = parse_config(config_text, std::filesystem::path(o.config).parent_path());
  if (!o.routers.empty()) cfg.routers = parse_router_list(o.routers, cfg);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

int cmd_run(const Options& o) {
  std::string config_text;
  const ScenarioConfig cfg = prepare(o, config_text);
  const auto reports = run_replications(cfg, cfg.seed, o.jobs);

  const std::filesystem::path out(o.out);
  auto f = open_out(out);
  write_rows(f, to_rows(reports));
  close_out(f, out);
  const auto flows_path = sibling(out, ".flows.csv");
  auto ff = open_out(flows_path);
  write_flow_rows(ff, reports);
  close_out(ff, flows_path);

  Json meta = meta_base("run", o, config_text, cfg.seed, cfg.replications);
  Json routers = Json::array();
  for (const RouterKind& r : cfg.routers) routers.push_back(r.name());
  meta["routers"] = routers;
  write_meta(out, meta);
  return ok;
}

int cmd_sweep(const Options& o) {
  std::string config_text;
  const ScenarioConfig cfg = prepare(o, config_text);
  const auto grid = parse_grid(o.grid);
  const SweepOutcome sweep = sweep_weights(cfg, grid, cfg.seed, o.jobs);

  const std::filesystem::path out(o.out);
  auto f = open_out(out);
  write_rows(f, sweep.rows);
  close_out(f, out);

  const auto points_path = sibling(out, ".points.csv");
  auto pf = open_out(points_path);
  pf << "w1,w2,w3,success_rate,weighted_throughput_mbps,mean_fct,best\n";
  for (std::size_t k = 0; k < sweep.points.size(); ++k) {
    const SweepPoint& p = sweep.points[k];
    fmt::print(pf, "{},{},{},{},{},{},{}\n", fmt_double(p.weights.length()),
               fmt_double(p.weights.lifetime()), fmt_double(p.weights.load()),
               fmt_double(p.success_rate), fmt_double(p.weighted_throughput_mbps),
               fmt_double(p.mean_fct), k == sweep.best ? 1 : 0);
  }
  close_out(pf, points_path);

  auto as_json = [](const Weights& w) {
    return Json::array({w.length(), w.lifetime(), w.load()});
  };
  auto argbest = [&](auto better) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < sweep.points.size(); ++k) {
      if (better(sweep.points[k], sweep.points[best])) best = k;
    }
    return best;
  };
  const std::size_t by_success = argbest(
      [](const SweepPoint& a, const SweepPoint& b) { return a.success_rate > b.success_rate; });
  const std::size_t by_throughput = argbest([](const SweepPoint& a, const SweepPoint& b) {
    return a.weighted_throughput_mbps > b.weighted_throughput_mbps;
  });
  const std::size_t by_fct =
      argbest([](const SweepPoint& a, const SweepPoint& b) { return a.mean_fct < b.mean_fct; });

  Json meta = meta_base("sweep-weights", o, config_text, cfg.seed, cfg.replications);
  meta["grid_spec"] = o.grid;
  Json pts = Json::array();
  for (const Weights& w : grid) pts.push_back(as_json(w));
  meta["grid"] = pts;
  meta["best"] = as_json(sweep.points[sweep.best].weights);
  meta["argmax"] = {{"success_rate", as_json(sweep.points[by_success].weights)},
                    {"weighted_throughput_mbps", as_json(sweep.points[by_throughput].weights)},
                    {"mean_fct", as_json(sweep.points[by_fct].weights)}};
  write_meta(out, meta);

  const Weights& b = sweep.points[sweep.best].weights;
  fmt::print("best w = ({}, {}, {})  mean_fct {:.3f}  success {:.3f}\n", b.length(), b.lifetime(),
             b.load(), sweep.points[sweep.best].mean_fct, sweep.points[sweep.best].success_rate);
  return ok;
}

int cmd_predict(const Options& o) {
  std::string config_text;
  const ScenarioConfig cfg = prepare(o, config_text);
  const auto runs = run_predictions(cfg, cfg.seed, o.jobs);

  const std::filesystem::path out(o.out);
  auto f = open_out(out);
  f << "run,seed,links,kinematic_mean,kinematic_stddev,extrapolation_mean,extrapolation_stddev\n";
  std::vector<double> kin;
  std::vector<double> ext;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const PredictionRun& p = runs[r];
    fmt::print(f, "{},{},{},{},{},{},{}\n", r, p.seed, p.links.size(), fmt_double(p.kinematic.mean),
               fmt_double(p.kinematic.stddev), fmt_double(p.extrapolation.mean),
               fmt_double(p.extrapolation.stddev));
    for (const auto& s : p.links) {
      kin.push_back(std::abs(s.kinematic - s.observed));
      ext.push_back(std::abs(s.extrapolation - s.observed));
    }
  }
  close_out(f, out);

  const auto links_path = sibling(out, ".links.csv");
  auto lf = open_out(links_path);
  lf << "run,seed,a,b,kinematic,extrapolation,observed\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const auto& s : runs[r].links) {
      fmt::print(lf, "{},{},{},{},{},{},{}\n", r, runs[r].seed, s.a, s.b, fmt_double(s.kinematic),
                 fmt_double(s.extrapolation), fmt_double(s.observed));
    }
  }
  close_out(lf, links_path);

  const ErrorStats k = error_stats(kin);
  const ErrorStats e = error_stats(ext);
  Json meta = meta_base("predict-eval", o, config_text, cfg.seed, cfg.prediction.runs);
  meta["summary"] = {{"links", k.count},
                     {"kinematic", {{"mean", k.mean}, {"stddev", k.stddev}}},
                     {"extrapolation", {{"mean", e.mean}, {"stddev", e.stddev}}}};
  write_meta(out, meta);
  fmt::print("links {}  kinematic |err| {:.3f} +/- {:.3f}  extrapolation |err| {:.3f} +/- {:.3f}\n",
             k.count, k.mean, k.stddev, e.mean, e.stddev);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FANET routing simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario file (JSON)")->required();
    sub->add_option("--out", o.out, "result table (CSV)")->required();
    sub->add_option("--seed", o.seed, "base seed; replication r uses seed + r");
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--routers", o.routers, "comma separated router list");
  };
  auto* run_cmd = app.add_subcommand("run", "run every router x replication cell");
  add_common(run_cmd);
  auto* sweep_cmd = app.add_subcommand("sweep-weights", "lb_opar weight sweep");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--grid", o.grid, "w3 | w1w2:<w3> | \"w1,w2,w3;...\"");
  auto* predict_cmd = app.add_subcommand("predict-eval", "link lifetime prediction error");
  add_common(predict_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(o);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
    return cmd_predict(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return io_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace fanet::cli
