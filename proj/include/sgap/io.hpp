#pragma once

// Serialization: sgdict-1 dictionary files, JSON for every report type, and
// flat per-trial CSV. Column orders are fixed; downstream plotting relies on
// them.

#include "sgap/dictionary.hpp"
#include "sgap/gap_bounds.hpp"
#include "sgap/generic_experiments.hpp"
#include "sgap/random_sets.hpp"
#include "sgap/schatten_rank.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>

namespace sgap {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kDictFormat = "sgdict-1";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// JSON number, or null when non-finite.
inline Json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Basic types

inline Json to_json(const AtomSet& s) {
  Json j = Json::array();
  for (Index i : s) j.push_back(i);
  return j;
}

inline Json to_json(const Provenance& p) {
  Json j;
  j["kind"] = p.kind;
  j["seed"] = p.seed ? Json(*p.seed) : Json(nullptr);
  Json params = Json::object();
  for (const auto& [k, v] : p.params) params[k] = v;
  j["params"] = params;
  return j;
}

inline Provenance provenance_from_json(const Json& j) {
  Provenance p;
  p.kind = j.at("kind").get<std::string>();
  if (j.contains("seed") && !j.at("seed").is_null()) p.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("params"))
    for (const auto& [k, v] : j.at("params").items()) p.params[k] = v.get<double>();
  return p;
}

inline Json to_json(const Threshold& t) {
  Json j;
  j["value"] = json_number(t.value);
  j["status"] = std::string(to_string(t.status));
  return j;
}

inline Json to_json(const WeakIncoherenceCheck& w) {
  Json j;
  j["tight"] = w.tight;
  j["tightness_residual"] = w.tightness_residual;
  j["tightness_margin"] = w.tightness_margin;
  j["incoherent"] = w.incoherent;
  j["coherence"] = w.coherence;
  j["coherence_limit"] = w.coherence_limit;
  j["coherence_margin"] = w.coherence_margin;
  j["passes"] = w.passes();
  return j;
}

inline Json dictionary_metrics(const Dictionary& d) {
  Json j;
  j["coherence"] = d.coherence();
  j["redundancy"] = d.redundancy();
  return j;
}

// ---------------------------------------------------------------------------
// sgdict-1: metadata JSON at `path`, payload at `path` + ".bin" holding
// interleaved (re, im) float64 little-endian values in column-major order.

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::filesystem::path payload_path(const std::filesystem::path& meta) {
  return std::filesystem::path(meta.string() + ".bin");
}

inline void write_le64(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  os.write(bytes.data(), 8);
}

inline double read_le64(std::istream& is) {
  std::array<unsigned char, 8> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!is) throw FormatError("sgdict-1 payload truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[static_cast<std::size_t>(i)]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline Json dictionary_metadata(const Dictionary& d, const std::string& payload_file) {
  Json j;
  j["format"] = std::string(kDictFormat);
  j["m"] = d.m();
  j["n_atoms"] = d.n_atoms();
  j["provenance"] = to_json(d.provenance());
  j["metrics"] = dictionary_metrics(d);
  Json payload;
  payload["file"] = payload_file;
  payload["encoding"] = "complex128-le-interleaved";
  payload["order"] = "column-major";
  payload["bytes"] = d.m() * d.n_atoms() * 16;
  j["payload"] = payload;
  return j;
}

inline void save_dictionary(const Dictionary& d, const std::filesystem::path& path) {
  const std::filesystem::path bin = payload_path(path);
  {
    std::ofstream os(bin, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + bin.string() + " for writing");
    for (Index j = 0; j < d.n_atoms(); ++j)
      for (Index i = 0; i < d.m(); ++i) {
        write_le64(os, d.atoms()(i, j).real());
        write_le64(os, d.atoms()(i, j).imag());
      }
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << dictionary_metadata(d, bin.filename().string()).dump(2) << '\n';
}

struct LoadedDictionary {
  Dictionary dictionary;
  double cached_coherence = 0.0;
  double cached_redundancy = 0.0;
};

inline LoadedDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  Json meta;
  try {
    meta = Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw FormatError("sgdict-1 metadata is not valid JSON: " + std::string(e.what()));
  }
  if (!meta.contains("format") || meta.at("format") != kDictFormat)
    throw FormatError("unsupported dictionary format (expected sgdict-1)");
  const auto m = meta.at("m").get<Index>();
  const auto n = meta.at("n_atoms").get<Index>();
  if (m < 1 || n < 1) throw FormatError("sgdict-1 dimensions must be positive");
  const std::filesystem::path bin = path.parent_path() / meta.at("payload").at("file").get<std::string>();
  std::ifstream bs(bin, std::ios::binary);
  if (!bs) throw std::runtime_error("cannot open payload " + bin.string());
  Matrix atoms(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) {
      const double re = read_le64(bs);
      const double im = read_le64(bs);
      atoms(i, j) = Complex(re, im);
    }
  if (bs.peek() != std::char_traits<char>::eof()) throw FormatError("sgdict-1 payload has trailing bytes");
  LoadedDictionary out{Dictionary::from_atoms(std::move(atoms), provenance_from_json(meta.at("provenance"))), 0, 0};
  out.cached_coherence = meta.at("metrics").at("coherence").get<double>();
  out.cached_redundancy = meta.at("metrics").at("redundancy").get<double>();
  return out;
}

// ---------------------------------------------------------------------------
// Rank and threshold reports

inline Json to_json(const RankReport& r) {
  Json j;
  j["rows"] = r.rows;
  j["cols"] = r.cols;
  j["exact_rank"] = r.exact_rank;
  j["tolerance_used"] = r.tolerance_used;
  j["lb_trace_frobenius"] = r.lb_trace_frobenius;
  j["lb_frobenius_spectral"] = r.lb_frobenius_spectral;
  if (r.lb_norm_ratio) {
    Json nr;
    nr["p"] = json_number(r.lb_norm_ratio->p);
    nr["q"] = std::isinf(r.lb_norm_ratio->q) ? Json("inf") : Json(r.lb_norm_ratio->q);
    nr["value"] = r.lb_norm_ratio->value;
    j["lb_norm_ratio"] = nr;
  } else {
    j["lb_norm_ratio"] = nullptr;
  }
  j["lb_coherence"] = r.lb_coherence ? Json(*r.lb_coherence) : Json(nullptr);
  Json sv = Json::array();
  for (Index i = 0; i < r.singular_values.size(); ++i) sv.push_back(r.singular_values(i));
  j["singular_values"] = sv;
  return j;
}

inline Json to_json(const GapThresholds& g) {
  Json j;
  j["s"] = g.s;
  j["t"] = g.t;
  j["delta"] = g.delta;
  j["mu"] = g.mu;
  j["m"] = g.m;
  j["n_atoms"] = g.n_atoms;
  j["donoho_elad_lhs"] = g.donoho_elad_lhs;
  j["donoho_elad_rhs"] = to_json(g.donoho_elad_rhs);
  j["strong_gap_rhs"] = to_json(g.strong_gap_rhs);
  j["overlap_rhs"] = to_json(g.overlap.rhs);
  j["overlap_holds"] = g.overlap.holds;
  j["overlap_comparison"] = std::string(OverlapDecision::comparison);
  j["t_threshold"] = to_json(g.t_threshold);
  j["generic_up_rhs"] = to_json(g.generic_up_rhs);
  j["weak_gap_rhs"] = to_json(g.weak_gap_rhs);
  j["weak_gap_simplified_rhs"] = to_json(g.weak_gap_simplified_rhs);
  return j;
}

inline constexpr std::array<std::string_view, 16> kThresholdCsvColumns = {
    "s",           "t",           "delta",          "mu",           "m",
    "n_atoms",     "donoho_elad_lhs", "donoho_elad_rhs", "strong_gap_rhs", "overlap_rhs",
    "overlap_holds", "t_threshold", "generic_up_rhs", "weak_gap_rhs", "weak_gap_simplified_rhs",
    "error"};

/// Numeric value, or the status name when the threshold is flagged.
inline std::string csv_threshold(const Threshold& t) {
  return t.ok() ? format_double(t.value) : std::string(to_string(t.status));
}

/// Quotes a free-text cell when it contains a separator, quote or newline.
inline std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_csv_header(std::ostream& os, std::span<const std::string_view> cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

inline void write_csv_row(std::ostream& os, const GapThresholds& g) {
  os << g.s << ',' << g.t << ',' << g.delta << ',' << format_double(g.mu) << ',' << g.m << ',' << g.n_atoms << ','
     << g.donoho_elad_lhs << ',' << csv_threshold(g.donoho_elad_rhs) << ',' << csv_threshold(g.strong_gap_rhs) << ','
     << csv_threshold(g.overlap.rhs) << ',' << int(g.overlap.holds) << ',' << csv_threshold(g.t_threshold) << ','
     << csv_threshold(g.generic_up_rhs) << ',' << csv_threshold(g.weak_gap_rhs) << ','
     << csv_threshold(g.weak_gap_simplified_rhs) << ",\n";
}

// ---------------------------------------------------------------------------
// Experiment reports

inline Json to_json(const ResidualTolerances& t) {
  Json j;
  j["ceiling"] = t.ceiling;
  j["floor"] = t.floor;
  j["policy"] = "two-threshold residual test (design choice, not a derived constant)";
  return j;
}

inline Json to_json(const ExperimentSummary& s) {
  Json j;
  j["pairs"] = s.pairs;
  j["trials"] = s.trials;
  j["representable"] = s.representable;
  j["not_representable"] = s.not_representable;
  j["inconclusive"] = s.inconclusive;
  j["rank_condition_failures"] = s.rank_condition_failures;
  j["rank_condition_failure_fraction"] =
      s.pairs > 0 ? double(s.rank_condition_failures) / double(s.pairs) : 0.0;
  j["predicted_pairs"] = s.predicted_pairs;
  j["soundness_violations"] = s.soundness_violations;
  j["completeness_violations"] = s.completeness_violations;
  j["prediction_violations"] = s.prediction_violations;
  j["conditioning_redraws"] = s.conditioning_redraws;
  j["independence_redraws"] = s.independence_redraws;
  j["consistent"] = s.consistent();
  return j;
}

inline Json to_json(const ExperimentReport& r) {
  Json j;
  j["experiment"] = r.experiment;
  j["prediction_rule"] = r.prediction_rule.empty() ? Json(nullptr) : Json(r.prediction_rule);
  j["dictionary"] = to_json(r.dictionary);
  j["m"] = r.m;
  j["n_atoms"] = r.n_atoms;
  j["coherence"] = r.coherence;
  Json params = Json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  j["params"] = params;
  j["tolerances"] = to_json(r.tolerances);
  j["summary"] = to_json(r.summary);
  j["notes"] = r.notes;
  Json pairs = Json::array();
  for (const PairRecord& p : r.pairs) {
    Json pj;
    pj["pair"] = p.pair;
    pj["seed"] = p.seed;
    pj["S"] = to_json(p.s);
    pj["T"] = to_json(p.t);
    pj["delta"] = p.delta;
    pj["rank_r"] = p.rank_r;
    pj["rank_t"] = p.rank_t;
    pj["rank_condition"] = p.rank_condition;
    pj["containment"] = p.containment;
    pj["predicted"] = p.predicted ? Json(*p.predicted) : Json(nullptr);
    pj["condition_t"] = json_number(p.condition_t);
    pj["s_redraws"] = p.s_redraws;
    pj["t_redraws"] = p.t_redraws;
    pairs.push_back(pj);
  }
  j["pairs"] = pairs;
  Json trials = Json::array();
  for (const TrialRecord& t : r.trials) {
    Json tj;
    tj["pair"] = t.pair;
    tj["trial"] = t.trial;
    tj["seed"] = t.seed;
    tj["residual"] = t.residual;
    tj["verdict"] = std::string(to_string(t.verdict));
    trials.push_back(tj);
  }
  j["trials"] = trials;
  return j;
}

inline constexpr std::array<std::string_view, 13> kExperimentCsvColumns = {
    "pair", "trial", "seed", "s", "t", "delta", "rank_r", "rank_t", "rank_condition", "containment", "predicted",
    "residual", "verdict"};

inline void write_csv(std::ostream& os, const ExperimentReport& r) {
  write_csv_header(os, kExperimentCsvColumns);
  for (const TrialRecord& t : r.trials) {
    const PairRecord& p = r.pairs[static_cast<std::size_t>(t.pair)];
    os << t.pair << ',' << t.trial << ',' << t.seed << ',' << p.s.size() << ',' << p.t.size() << ',' << p.delta << ','
       << p.rank_r << ',' << p.rank_t << ',' << int(p.rank_condition) << ',' << int(p.containment) << ','
       << (p.predicted ? std::to_string(int(*p.predicted)) : std::string("NA")) << ','
       << format_double(t.residual) << ',' << to_string(t.verdict) << '\n';
  }
}

inline Json to_json(const SubsetStatistics& s) {
  Json j;
  j["s"] = s.s;
  j["seed"] = s.seed;
  j["max_cross_correlation"] = s.max_cross_correlation;
  j["gram_deviation"] = s.gram_deviation;
  j["pinv_norm"] = json_number(s.pinv_norm);
  return j;
}

inline Json to_json(const SweepReport& r) {
  Json j;
  j["experiment"] = "statistics_sweep";
  j["dictionary"] = to_json(r.dictionary);
  j["m"] = r.m;
  j["n_atoms"] = r.n_atoms;
  j["coherence"] = r.coherence;
  Json cfg;
  cfg["s_values"] = r.config.s_values;
  cfg["trials_per_s"] = r.config.trials_per_s;
  cfg["beta"] = r.config.beta;
  cfg["master_seed"] = r.config.master_seed;
  cfg["c_sparsity"] = r.config.c_sparsity;
  cfg["in_regime"] = r.config.in_regime;
  j["config"] = cfg;
  j["upper_quantile_level"] = r.upper_quantile_level;
  j["gates"] = {{"max_cross_correlation", kCrossGate}, {"pinv_norm", kPinvGate}};
  j["regime_check"] = r.regime_check ? to_json(*r.regime_check) : Json(nullptr);
  Json per = Json::array();
  for (const SweepSummary& s : r.per_s) {
    Json sj;
    sj["s"] = s.s;
    sj["trials"] = s.trials;
    auto q = [](const StatisticQuantiles& x) {
      Json qj;
      qj["median"] = json_number(x.median);
      qj["upper"] = json_number(x.upper);
      return qj;
    };
    sj["max_cross_correlation"] = q(s.max_cross_correlation);
    sj["gram_deviation"] = q(s.gram_deviation);
    sj["pinv_norm"] = q(s.pinv_norm);
    sj["gate_violation_fraction"] = s.gate_violation_fraction;
    per.push_back(sj);
  }
  j["per_s"] = per;
  Json trials = Json::array();
  for (const SweepTrial& t : r.trials) {
    Json tj = to_json(t.stats);
    tj["trial"] = t.trial;
    tj["cross_gate"] = t.cross_gate;
    tj["pinv_gate"] = t.pinv_gate;
    trials.push_back(tj);
  }
  j["trials"] = trials;
  return j;
}

inline constexpr std::array<std::string_view, 8> kSweepCsvColumns = {
    "s", "trial", "seed", "max_cross_correlation", "gram_deviation", "pinv_norm", "cross_gate", "pinv_gate"};

inline void write_csv(std::ostream& os, const SweepReport& r) {
  write_csv_header(os, kSweepCsvColumns);
  for (const SweepTrial& t : r.trials)
    os << t.s << ',' << t.trial << ',' << t.stats.seed << ',' << format_double(t.stats.max_cross_correlation) << ','
       << format_double(t.stats.gram_deviation) << ',' << format_double(t.stats.pinv_norm) << ','
       << int(t.cross_gate) << ',' << int(t.pinv_gate) << '\n';
}

inline Json to_json(const ViolationCounts& c) {
  Json j;
  j["trials"] = c.trials;
  j["stated_bound"] = c.stated;
  j["gate_lemma_bound"] = c.gate_lemma;
  j["measured_bound"] = c.measured;
  return j;
}

inline Json to_json(const WeakRankReport& r) {
  Json j;
  j["experiment"] = "weak_rank";
  j["dictionary"] = to_json(r.dictionary);
  j["m"] = r.m;
  j["n_atoms"] = r.n_atoms;
  Json cfg;
  cfg["s"] = r.config.s;
  cfg["v_size"] = r.config.v_size;
  cfg["trials"] = r.config.trials;
  cfg["master_seed"] = r.config.master_seed;
  cfg["c_sparsity"] = r.config.c_sparsity ? Json(*r.config.c_sparsity) : Json(nullptr);
  j["config"] = cfg;
  j["bounds"] = {{"stated", "|S| + 2 m |V| / N"},
                 {"gate_lemma", "|S| + m |V| / (2 N)"},
                 {"measured", "|S| + rho^-1 |V| (1 - ||Phi_S^+||^2 max ||Phi_S* phi_v||^2)"}};
  j["violations_gated"] = to_json(r.gated);
  j["violations_ungated"] = to_json(r.ungated);
  j["dependent_s"] = r.dependent_s;
  Json trials = Json::array();
  for (const WeakRankTrial& t : r.trials) {
    Json tj;
    tj["trial"] = t.trial;
    tj["seed"] = t.seed;
    tj["rank_r"] = t.rank_r;
    tj["s_independent"] = t.s_independent;
    tj["gated"] = t.gated;
    tj["statistics"] = to_json(t.stats);
    tj["bound_stated"] = t.bound_stated;
    tj["bound_gate_lemma"] = t.bound_gate_lemma;
    tj["bound_measured"] = t.bound_measured;
    trials.push_back(tj);
  }
  j["trials"] = trials;
  return j;
}

inline constexpr std::array<std::string_view, 11> kWeakRankCsvColumns = {
    "trial", "seed", "rank_r", "s_independent", "gated", "max_cross_correlation", "pinv_norm", "bound_stated",
    "bound_gate_lemma", "bound_measured", "violates_stated"};

inline void write_csv(std::ostream& os, const WeakRankReport& r) {
  write_csv_header(os, kWeakRankCsvColumns);
  for (const WeakRankTrial& t : r.trials)
    os << t.trial << ',' << t.seed << ',' << t.rank_r << ',' << int(t.s_independent) << ',' << int(t.gated) << ','
       << format_double(t.stats.max_cross_correlation) << ',' << format_double(t.stats.pinv_norm) << ','
       << format_double(t.bound_stated) << ',' << format_double(t.bound_gate_lemma) << ','
       << format_double(t.bound_measured) << ',' << int(t.violates_stated) << '\n';
}

// ---------------------------------------------------------------------------
// Run manifests

struct RunManifest {
  std::string command_line;
  std::string config_digest;  // FNV-1a of the canonical config, timestamp excluded
  Json dictionary_provenance;
  std::uint64_t master_seed = 0;
  std::string tool_version = std::string(kToolVersion);
  std::string timestamp;
};

inline Json to_json(const RunManifest& m) {
  Json j;
  j["command_line"] = m.command_line;
  j["config_digest"] = m.config_digest;
  j["dictionary_provenance"] = m.dictionary_provenance;
  j["master_seed"] = m.master_seed;
  j["tool_version"] = m.tool_version;
  j["timestamp"] = m.timestamp;
  return j;
}

/// {"manifest": ..., "payload_digest": ..., "payload": ...}. The payload and
/// its digest are reproducible; the manifest carries the timestamp.
inline Json wrap_report(const RunManifest& manifest, const Json& payload) {
  Json j;
  j["manifest"] = to_json(manifest);
  j["payload_digest"] = fnv1a_hex(payload.dump());
  j["payload"] = payload;
  return j;
}

}  // namespace sgap
