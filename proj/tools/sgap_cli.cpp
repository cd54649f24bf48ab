// sgap: build and inspect dictionaries, tabulate uncertainty thresholds, and
// run seeded Monte Carlo experiments with machine-readable reports.
//
// Exit status: 0 when every checked invariant held, 1 on a soundness
// violation or INCONCLUSIVE verdict, 2 on usage or configuration errors.

#include "sgap/sgap.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using sgap::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join_argv(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dictionary specs shared by `dict` and experiment configs.

struct DictSpec {
  std::string kind;
  long m = 0;
  long n_atoms = 0;
  std::uint64_t seed = 0;
  std::string file;
};

sgap::Dictionary build_dictionary(const DictSpec& spec) {
  if (!spec.file.empty()) return sgap::load_dictionary(spec.file).dictionary;
  if (spec.kind == "spikes-sines") return sgap::build_spikes_sines(spec.m);
  if (spec.kind == "identity") return sgap::build_identity(spec.m);
  if (spec.kind == "random-unit-norm") return sgap::build_random_unit_norm(spec.m, spec.n_atoms, spec.seed);
  if (spec.kind == "random-tight-frame") return sgap::build_random_tight_frame(spec.m, spec.n_atoms, spec.seed);
  throw ConfigError("unknown dictionary kind '" + spec.kind + "'");
}

void print_metrics(std::ostream& os, const sgap::Dictionary& d, double c) {
  const auto weak = sgap::is_weakly_incoherent(d, c);
  os << "kind: " << d.provenance().kind << '\n'
     << "m: " << d.m() << '\n'
     << "n_atoms: " << d.n_atoms() << '\n'
     << "coherence: " << sgap::format_double(d.coherence()) << '\n'
     << "redundancy: " << sgap::format_double(d.redundancy()) << '\n'
     << "welch_lower_bound: " << sgap::format_double(sgap::welch_lower_bound(d.m(), d.n_atoms())) << '\n'
     << "tight_frame: " << (weak.tight ? "yes" : "no") << " (|rho - N/m| = "
     << sgap::format_double(weak.tightness_residual) << ")\n"
     << "weak_incoherence: c = " << sgap::format_double(c) << ", mu <= c/log N = "
     << sgap::format_double(weak.coherence_limit) << ": " << (weak.incoherent ? "yes" : "no")
     << ", passes: " << (weak.passes() ? "yes" : "no") << '\n';
}

int cmd_dict(const DictSpec& spec, const std::string& out, const std::string& inspect, double c,
             const std::string& format) {
  if (!inspect.empty()) {
    const sgap::LoadedDictionary loaded = sgap::load_dictionary(inspect);
    const sgap::Dictionary& d = loaded.dictionary;
    const bool match = loaded.cached_coherence == d.coherence() && loaded.cached_redundancy == d.redundancy();
    if (format == "json") {
      Json j = sgap::dictionary_metadata(d, sgap::payload_path(inspect).filename().string());
      j["weak_incoherence"] = sgap::to_json(sgap::is_weakly_incoherent(d, c));
      j["welch_lower_bound"] = sgap::welch_lower_bound(d.m(), d.n_atoms());
      j["cached_metrics_match"] = match;
      std::cout << j.dump(2) << '\n';
    } else {
      print_metrics(std::cout, d, c);
      std::cout << "cached_metrics_match: " << (match ? "yes" : "no") << '\n';
    }
    return match ? kExitOk : kExitViolation;
  }
  const sgap::Dictionary d = build_dictionary(spec);
  if (!out.empty()) sgap::save_dictionary(d, out);
  if (format == "json") {
    Json j = sgap::dictionary_metadata(d, out.empty() ? "" : sgap::payload_path(out).filename().string());
    j["weak_incoherence"] = sgap::to_json(sgap::is_weakly_incoherent(d, c));
    j["welch_lower_bound"] = sgap::welch_lower_bound(d.m(), d.n_atoms());
    std::cout << j.dump(2) << '\n';
  } else {
    print_metrics(std::cout, d, c);
    if (!out.empty()) std::cout << "written: " << out << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsArgs {
  std::optional<double> mu;
  std::string dict_file;
  long s_min = 1;
  long s_max = 1;
  std::optional<long> t;
  long delta = 0;
  long m = 0;
  long n_atoms = 0;
  std::string format = "csv";
  std::string out;
};

int cmd_bounds(const BoundsArgs& a) {
  double mu = 0.0;
  long m = a.m;
  long n = a.n_atoms;
  if (!a.dict_file.empty()) {
    const auto loaded = sgap::load_dictionary(a.dict_file);
    mu = loaded.dictionary.coherence();
    m = loaded.dictionary.m();
    n = loaded.dictionary.n_atoms();
  } else if (a.mu) {
    mu = *a.mu;
  } else {
    throw ConfigError("bounds needs --mu or --dict");
  }
  if ((m == 0) != (n == 0)) throw ConfigError("--m and --n must be given together");
  if (a.s_min < 1 || a.s_max < a.s_min) throw ConfigError("need 1 <= s-min <= s-max");

  std::ostringstream csv;
  Json rows = Json::array();
  sgap::write_csv_header(csv, sgap::kThresholdCsvColumns);
  for (long s = a.s_min; s <= a.s_max; ++s) {
    const long t = a.t.value_or(s);
    try {
      const sgap::GapThresholds g = sgap::compute_gap_thresholds(s, t, a.delta, mu, m, n);
      sgap::write_csv_row(csv, g);
      Json row = sgap::to_json(g);
      row["error"] = nullptr;
      rows.push_back(row);
    } catch (const std::invalid_argument& e) {
      csv << s << ',' << t << ',' << a.delta << ',' << sgap::format_double(mu) << ',' << m << ',' << n
          << ",,,,,,,,,," << sgap::csv_field(std::string("error: ") + e.what()) << '\n';
      Json row;
      row["s"] = s;
      row["t"] = t;
      row["delta"] = a.delta;
      row["mu"] = mu;
      row["m"] = m;
      row["n_atoms"] = n;
      row["error"] = e.what();
      rows.push_back(row);
    }
  }
  std::string text;
  if (a.format == "json") {
    Json j;
    j["rows"] = rows;
    text = j.dump(2) + "\n";
  } else {
    text = csv.str();
  }
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot write " + a.out);
    os << text;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment

// Strict accessors: every key must be known, and types are checked before
// anything runs.
class ConfigReader {
 public:
  ConfigReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  long integer(const std::string& key, std::optional<long> fallback = std::nullopt) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where_ + ": missing required integer '" + key + "'");
    }
    if (!j_.at(key).is_number_integer()) throw ConfigError(where_ + ": '" + key + "' must be an integer");
    return j_.at(key).get<long>();
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_.at(key).is_number_unsigned() && !(j_.at(key).is_number_integer() && j_.at(key).get<long>() >= 0))
      throw ConfigError(where_ + ": '" + key + "' must be a nonnegative integer");
    return j_.at(key).get<std::uint64_t>();
  }

  double real(const std::string& key, std::optional<double> fallback = std::nullopt) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where_ + ": missing required number '" + key + "'");
    }
    if (!j_.at(key).is_number()) throw ConfigError(where_ + ": '" + key + "' must be a number");
    return j_.at(key).get<double>();
  }

  bool boolean(const std::string& key, bool fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw ConfigError(where_ + ": '" + key + "' must be a boolean");
    return j_.at(key).get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where_ + ": missing required string '" + key + "'");
    }
    if (!j_.at(key).is_string()) throw ConfigError(where_ + ": '" + key + "' must be a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<long> integers(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key) || !j_.at(key).is_array())
      throw ConfigError(where_ + ": '" + key + "' must be an array of integers");
    std::vector<long> out;
    for (const auto& v : j_.at(key)) {
      if (!v.is_number_integer()) throw ConfigError(where_ + ": '" + key + "' must hold integers");
      out.push_back(v.get<long>());
    }
    return out;
  }

  const Json& object(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing required object '" + key + "'");
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

struct ExperimentSpec {
  std::string name;
  std::string type;
  DictSpec dict;
  std::uint64_t seed = 0;
  sgap::ResidualTolerances tolerances;
  // pair experiments
  long s = 0, t = 0, t_min = 0, t_max = 0, delta = 0, pairs = 0, trials = 0;
  std::vector<long> set_s, set_t;
  // statistics sweep
  std::vector<long> s_values;
  double beta = 1.0;
  double c_sparsity = 1.0;
  bool in_regime = false;
  // weak rank
  long v_size = 0;
  std::optional<double> c_regime;
  Json canonical;  // effective config, used for the digest
};

const std::set<std::string> kExperimentTypes = {"gap", "equivalence", "weak_gap", "statistics_sweep", "weak_rank"};

DictSpec parse_dict_spec(const Json& j, const std::string& where) {
  ConfigReader r(j, where);
  DictSpec d;
  if (r.has("file")) {
    d.file = r.string("file");
  } else {
    d.kind = r.string("kind");
    static const std::set<std::string> kinds = {"spikes-sines", "identity", "random-unit-norm",
                                                "random-tight-frame"};
    if (!kinds.count(d.kind)) throw ConfigError(where + ": unknown dictionary kind '" + d.kind + "'");
    d.m = r.integer("m");
    const bool needs_n = d.kind == "random-unit-norm" || d.kind == "random-tight-frame";
    d.n_atoms = r.integer("n_atoms", needs_n ? std::nullopt : std::optional<long>(0));
    d.seed = r.seed("seed", 0);
  }
  r.finish();
  return d;
}

ExperimentSpec parse_experiment(const Json& j, std::size_t index, std::uint64_t default_seed,
                                std::optional<std::uint64_t> seed_override) {
  const std::string where = "experiments[" + std::to_string(index) + "]";
  ConfigReader r(j, where);
  ExperimentSpec e;
  e.type = r.string("type");
  if (!kExperimentTypes.count(e.type)) throw ConfigError(where + ": unknown experiment type '" + e.type + "'");
  e.name = r.string("name", e.type + "_" + std::to_string(index));
  e.dict = parse_dict_spec(r.object("dictionary"), where + ".dictionary");
  e.seed = seed_override.value_or(r.seed("seed", default_seed));
  if (seed_override) r.has("seed");
  if (r.has("tolerances")) {
    ConfigReader t(j.at("tolerances"), where + ".tolerances");
    e.tolerances.ceiling = t.real("ceiling", e.tolerances.ceiling);
    e.tolerances.floor = t.real("floor", e.tolerances.floor);
    t.finish();
    try {
      e.tolerances.validate();
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(where + ": " + ex.what());
    }
  }
  if (e.type == "gap") {
    e.s = r.integer("s");
    e.t = r.integer("t");
    e.delta = r.integer("delta", 0);
    e.pairs = r.integer("pairs");
    e.trials = r.integer("trials");
  } else if (e.type == "equivalence") {
    e.set_s = r.integers("S");
    e.set_t = r.integers("T");
    e.trials = r.integer("trials");
  } else if (e.type == "weak_gap") {
    e.s = r.integer("s");
    e.t_min = r.integer("t_min", 1);
    e.t_max = r.integer("t_max");
    e.pairs = r.integer("pairs");
    e.trials = r.integer("trials");
  } else if (e.type == "statistics_sweep") {
    e.s_values = r.integers("s_values");
    e.trials = r.integer("trials_per_s");
    e.beta = r.real("beta", 1.0);
    e.c_sparsity = r.real("c_sparsity", 1.0);
    e.in_regime = r.boolean("in_regime", false);
  } else if (e.type == "weak_rank") {
    e.s = r.integer("s");
    e.v_size = r.integer("v_size");
    e.trials = r.integer("trials");
    if (r.has("c_sparsity")) e.c_regime = r.real("c_sparsity");
  }
  r.finish();
  if (e.trials < 0 || e.pairs < 0) throw ConfigError(where + ": counts must be nonnegative");
  e.canonical = j;
  e.canonical["name"] = e.name;
  e.canonical["seed"] = e.seed;
  return e;
}

struct ExperimentOutcome {
  Json payload;
  std::string csv;
  bool ok = true;
  Json provenance;
};

ExperimentOutcome run_experiment(const ExperimentSpec& e, int threads) {
  const sgap::Dictionary d = build_dictionary(e.dict);
  ExperimentOutcome out;
  out.provenance = sgap::to_json(d.provenance());
  std::ostringstream csv;
  sgap::ExperimentOptions opts;
  opts.tolerances = e.tolerances;
  opts.threads = threads;
  if (e.type == "gap" || e.type == "equivalence" || e.type == "weak_gap") {
    sgap::ExperimentReport rep;
    if (e.type == "gap") {
      rep = sgap::gap_experiment(d, e.s, e.t, e.delta, e.pairs, e.trials, e.seed, opts);
    } else if (e.type == "weak_gap") {
      rep = sgap::weak_gap_experiment(d, e.s, e.t_min, e.t_max, e.pairs, e.trials, e.seed, opts);
    } else {
      rep = sgap::equivalence_experiment(d, sgap::AtomSet(std::vector<sgap::Index>(e.set_s.begin(), e.set_s.end())),
                                         sgap::AtomSet(std::vector<sgap::Index>(e.set_t.begin(), e.set_t.end())),
                                         e.trials, e.seed, opts);
    }
    rep.experiment = e.name;
    out.ok = rep.summary.consistent();
    out.payload = sgap::to_json(rep);
    out.payload["type"] = e.type;
    sgap::write_csv(csv, rep);
  } else if (e.type == "statistics_sweep") {
    sgap::SweepConfig cfg;
    cfg.s_values.assign(e.s_values.begin(), e.s_values.end());
    cfg.trials_per_s = e.trials;
    cfg.beta = e.beta;
    cfg.master_seed = e.seed;
    cfg.c_sparsity = e.c_sparsity;
    cfg.in_regime = e.in_regime;
    cfg.threads = threads;
    const sgap::SweepReport rep = sgap::statistics_sweep(d, cfg);
    out.payload = sgap::to_json(rep);
    out.payload["name"] = e.name;
    sgap::write_csv(csv, rep);
  } else {
    sgap::WeakRankConfig cfg;
    cfg.s = e.s;
    cfg.v_size = e.v_size;
    cfg.trials = e.trials;
    cfg.master_seed = e.seed;
    cfg.c_sparsity = e.c_regime;
    cfg.threads = threads;
    const sgap::WeakRankReport rep = sgap::weak_rank_bound_experiment(d, cfg);
    // The measured bound is a theorem for every independent S; the other two
    // are reported only.
    out.ok = rep.gated.measured == 0 && rep.ungated.measured == 0;
    out.payload = sgap::to_json(rep);
    out.payload["name"] = e.name;
    sgap::write_csv(csv, rep);
  }
  out.csv = csv.str();
  return out;
}

struct ExperimentArgs {
  std::string config;
  std::string name;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "both";
  std::optional<int> threads;
};

int cmd_experiment(const ExperimentArgs& a, const std::string& command_line) {
  if (a.config.empty()) throw ConfigError("experiment needs --config");
  std::ifstream is(a.config);
  if (!is) throw ConfigError("cannot open config " + a.config);
  Json cfg;
  try {
    cfg = Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ConfigReader top(cfg, "config");
  const std::uint64_t global_seed = a.seed.value_or(top.seed("seed", 0));
  if (a.seed) top.has("seed");
  const int threads = a.threads.value_or(static_cast<int>(top.integer("threads", 1)));
  std::string out_dir = top.string("out", ".");
  if (!a.out.empty()) out_dir = a.out;
  if (!top.has("experiments") || !cfg.at("experiments").is_array())
    throw ConfigError("config: 'experiments' must be an array");
  top.finish();

  std::vector<ExperimentSpec> specs;
  for (std::size_t i = 0; i < cfg.at("experiments").size(); ++i)
    specs.push_back(parse_experiment(cfg.at("experiments")[i], i, global_seed, a.seed));
  if (!a.name.empty()) {
    std::erase_if(specs, [&](const ExperimentSpec& e) { return e.name != a.name; });
    if (specs.empty()) throw ConfigError("no experiment named '" + a.name + "'");
  }
  std::set<std::string> names;
  for (const auto& e : specs)
    if (!names.insert(e.name).second) throw ConfigError("duplicate experiment name '" + e.name + "'");

  fs::create_directories(out_dir);
  bool all_ok = true;
  for (const ExperimentSpec& e : specs) {
    const ExperimentOutcome res = run_experiment(e, threads);
    sgap::RunManifest manifest;
    manifest.command_line = command_line;
    manifest.config_digest = sgap::fnv1a_hex(e.canonical.dump());
    manifest.dictionary_provenance = res.provenance;
    manifest.master_seed = e.seed;
    manifest.timestamp = utc_timestamp();
    if (a.format != "csv") {
      std::ofstream os(fs::path(out_dir) / (e.name + ".json"));
      os << sgap::wrap_report(manifest, res.payload).dump(2) << '\n';
    }
    if (a.format != "json") {
      std::ofstream os(fs::path(out_dir) / (e.name + ".csv"));
      os << res.csv;
    }
    std::cout << e.name << ": " << (res.ok ? "ok" : "VIOLATION") << '\n';
    all_ok = all_ok && res.ok;
  }
  return all_ok ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sgap: sparsity-gap rank bounds, uncertainty thresholds and generic-signal experiments"};
  app.require_subcommand(1);

  DictSpec dspec;
  std::string dict_out, dict_inspect, dict_format = "text";
  double dict_c = 1.0;
  auto* dict = app.add_subcommand("dict", "Build or inspect a dictionary (sgdict-1 files)");
  dict->add_option("--kind", dspec.kind, "spikes-sines | identity | random-unit-norm | random-tight-frame");
  dict->add_option("--m", dspec.m, "Ambient dimension");
  dict->add_option("--n", dspec.n_atoms, "Number of atoms (random kinds)");
  dict->add_option("--seed", dspec.seed, "RNG seed (random kinds)");
  dict->add_option("--out", dict_out, "Write metadata here and the payload to <out>.bin");
  dict->add_option("--inspect", dict_inspect, "Load an sgdict-1 file and report its metrics");
  dict->add_option("--c", dict_c, "Constant c in the weak-incoherence check mu <= c / log N");
  dict->add_option("--format", dict_format, "text | json")->check(CLI::IsMember({"text", "json"}));

  BoundsArgs bargs;
  auto* bounds = app.add_subcommand("bounds", "Tabulate every threshold over a sweep of s");
  bounds->add_option("--mu", bargs.mu, "Coherence");
  bounds->add_option("--dict", bargs.dict_file, "Take mu, m, N from an sgdict-1 file");
  bounds->add_option("--s-min", bargs.s_min, "First s")->default_val(1);
  bounds->add_option("--s-max", bargs.s_max, "Last s")->default_val(1);
  bounds->add_option("--t", bargs.t, "|T| (defaults to s)");
  bounds->add_option("--delta", bargs.delta, "Overlap |S n T|")->default_val(0);
  bounds->add_option("--m", bargs.m, "Ambient dimension (weak-incoherence thresholds)");
  bounds->add_option("--n", bargs.n_atoms, "Number of atoms (weak-incoherence thresholds)");
  bounds->add_option("--format", bargs.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  bounds->add_option("--out", bargs.out, "Output file (stdout when absent)");

  ExperimentArgs eargs;
  auto* experiment = app.add_subcommand("experiment", "Run experiments from a JSON config");
  experiment->add_option("--config", eargs.config, "Experiment config (JSON)");
  experiment->add_option("--name", eargs.name, "Run only the experiment with this name");
  experiment->add_option("--seed", eargs.seed, "Master seed (overrides the config)");
  experiment->add_option("--out", eargs.out, "Output directory (overrides the config)");
  experiment->add_option("--format", eargs.format, "json | csv | both")
      ->check(CLI::IsMember({"json", "csv", "both"}));
  experiment->add_option("--threads", eargs.threads, "Worker threads (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*dict) {
      if (dict_inspect.empty() && dspec.kind.empty()) throw ConfigError("dict needs --kind or --inspect");
      return cmd_dict(dspec, dict_out, dict_inspect, dict_c, dict_format);
    }
    if (*bounds) return cmd_bounds(bargs);
    if (*experiment) return cmd_experiment(eargs, join_argv(argc, argv));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
