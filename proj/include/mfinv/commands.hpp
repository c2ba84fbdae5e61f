#pragma once

// Subcommand implementations behind the mfinv executable.  Each command reads
// a RunConfig, writes its tables into the output directory and returns the
// process exit status.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfinv/cascade.hpp"
#include "mfinv/grids.hpp"
#include "mfinv/io.hpp"
#include "mfinv/measure.hpp"
#include "mfinv/pdf.hpp"
#include "mfinv/pipeline.hpp"

namespace mfinv {

enum class InputKind { price, volatility };

struct InputSource {
  std::optional<std::string> path;
  InputKind kind = InputKind::price;
  std::optional<double> drop_above;  // discard returns with |r| above this
  std::optional<CascadeSpec> cascade;
  int depth = 14;
  std::optional<std::uint64_t> seed;

  bool empty() const { return !path && !cascade; }

  nlohmann::json to_json() const {
    nlohmann::json j;
    if (path) {
      j["path"] = *path;
      j["kind"] = kind == InputKind::price ? "price" : "volatility";
      if (drop_above) j["drop_above"] = *drop_above;
    }
    if (cascade) {
      j["cascade"] = mfinv::to_json(*cascade);
      j["depth"] = depth;
      if (seed) j["seed"] = *seed;
    }
    return j;
  }
};

struct RunConfig {
  std::string command;
  InputSource input;
  std::optional<InputSource> inverse_input;
  double q_min = -4.0, q_max = 8.0, q_step = 0.25;
  double p_min = -4.0, p_max = 8.0, p_step = 0.25;
  std::optional<double> range_lo, range_hi;
  std::optional<double> inverse_range_lo, inverse_range_hi;
  std::vector<double> anchors{-2.0, 0.0, 2.0, 4.0};
  std::vector<double> pdf_multiples{0.5, 1.0, 2.0};
  Binning binning = Binning::log;
  std::size_t bins = 40;
  std::string out_dir = "mfinv_out";
  OutputFormat format = OutputFormat::csv;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["input"] = input.to_json();
    if (inverse_input) j["inverse_input"] = inverse_input->to_json();
    j["q_grid"] = {q_min, q_max, q_step};
    j["p_grid"] = {p_min, p_max, p_step};
    if (range_lo) j["range_lo"] = *range_lo;
    if (range_hi) j["range_hi"] = *range_hi;
    if (inverse_range_lo) j["inverse_range_lo"] = *inverse_range_lo;
    if (inverse_range_hi) j["inverse_range_hi"] = *inverse_range_hi;
    j["anchors"] = anchors;
    j["pdf_multiples"] = pdf_multiples;
    j["binning"] = to_string(binning);
    j["bins"] = bins;
    j["format"] = format == OutputFormat::csv ? "csv" : "json";
    return j;
  }

  /// Digest of everything that affects the results (the output directory does not).
  std::string hash() const { return hex64(fnv1a64(to_json().dump())); }

  void validate() const {
    const bool needs_input = command != "cascade";
    if (needs_input) {
      if (input.empty()) throw ValidationError("config: give --input or --cascade-weights");
      if (input.path && input.cascade) {
        throw ValidationError("config: --input and --cascade-weights are mutually exclusive");
      }
    } else if (!input.cascade) {
      throw ValidationError("config: cascade needs --cascade-weights");
    }
    if (inverse_input && inverse_input->path && inverse_input->cascade) {
      throw ValidationError("config: inverse input has two sources");
    }
    order_grid(q_min, q_max, q_step);
    order_grid(p_min, p_max, p_step);
    if (anchors.empty()) throw ValidationError("config: no anchor orders");
    if (range_lo.has_value() != range_hi.has_value()) {
      throw ValidationError("config: --range-lo and --range-hi go together");
    }
    if (inverse_range_lo.has_value() != inverse_range_hi.has_value()) {
      throw ValidationError("config: --inverse-range-lo and --inverse-range-hi go together");
    }
    if (bins == 0) throw ValidationError("config: --bins must be positive");
  }

  PipelineOptions pipeline_options() const {
    PipelineOptions o;
    o.q_grid = order_grid(q_min, q_max, q_step);
    o.p_grid = order_grid(p_min, p_max, p_step);
    o.anchors = anchors;
    if (range_lo) o.direct_range = ScaleRange{*range_lo, *range_hi};
    if (inverse_range_lo) o.inverse_range = ScaleRange{*inverse_range_lo, *inverse_range_hi};
    return o;
  }
};

struct LoadedSeries {
  VolatilitySeries vol;
  std::size_t original_length = 0;
  std::string description;
};

/// Reads or generates the volatility series and truncates it to a length
/// with a rich divisor set.
inline LoadedSeries load_series(const InputSource& src) {
  LoadedSeries out;
  VolatilitySeries raw;
  if (src.cascade) {
    if (!src.cascade->equal_ratios()) {
      throw ValidationError(
          "input: only equal-ratio cascades map onto a uniformly sampled series");
    }
    const GeneratedMeasure g = generate_cascade(*src.cascade, src.depth, src.seed);
    raw = VolatilitySeries::from_values(g.weights);
    out.description = "cascade depth " + std::to_string(src.depth);
  } else {
    const SeriesFile f = read_series_csv(*src.path);
    if (src.kind == InputKind::price) {
      std::vector<double> r = compute_returns(f.values);
      if (src.drop_above) r = drop_large_returns(r, *src.drop_above);
      raw = volatility_from_returns(r);
    } else {
      raw = VolatilitySeries::from_values(f.values);
    }
    out.description = *src.path;
  }
  out.original_length = raw.size();
  out.vol = truncate_for_boxes(raw);
  return out;
}

/// Writes tables and summaries into the output directory, stamping each file
/// with the configuration digest and the order grids.
class OutputWriter {
 public:
  explicit OutputWriter(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
      throw ValidationError("output directory is not writable: " + cfg.out_dir);
    }
  }

  void table(const std::string& name, const Table& t) {
    if (cfg_.format == OutputFormat::csv) {
      std::ofstream os = open(name + ".csv");
      write_csv(os, t, comments());
    } else {
      std::ofstream os = open(name + ".json");
      os << table_to_json(t, meta()).dump(2) << '\n';
    }
  }

  void json(const std::string& name, nlohmann::json body) {
    body["meta"] = meta();
    std::ofstream os = open(name + ".json");
    os << body.dump(2) << '\n';
  }

  std::vector<std::string> written() const { return written_; }

 private:
  std::vector<std::string> comments() const {
    return {"mfinv " + cfg_.command + " config_hash=" + cfg_.hash(),
            "q_grid=" + grid_text(cfg_.q_min, cfg_.q_max, cfg_.q_step) +
                " p_grid=" + grid_text(cfg_.p_min, cfg_.p_max, cfg_.p_step)};
  }
  nlohmann::json meta() const {
    return {{"command", cfg_.command},
            {"config_hash", cfg_.hash()},
            {"q_grid", {cfg_.q_min, cfg_.q_max, cfg_.q_step}},
            {"p_grid", {cfg_.p_min, cfg_.p_max, cfg_.p_step}}};
  }
  static std::string grid_text(double lo, double hi, double step) {
    return format_double(lo) + ":" + format_double(hi) + ":" + format_double(step);
  }
  std::ofstream open(const std::string& file) {
    const auto path = dir_ / file;
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write " + path.string());
    written_.push_back(path.string());
    return os;
  }

  const RunConfig& cfg_;
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

namespace detail {

inline Table partition_table(const PartitionCurve& c) {
  Table t{{"order", "scale", "log_value", "missing_flag"}, {}};
  for (std::size_t i = 0; i < c.orders.size(); ++i) {
    for (std::size_t j = 0; j < c.scales.size(); ++j) {
      const bool miss = c.missing(i, j);
      t.rows.push_back({c.orders[i], c.scales[j], miss ? Cell{} : Cell{c.at(i, j)},
                        static_cast<long long>(miss)});
    }
  }
  return t;
}

inline Table exponent_table(const ExponentCurve& e) {
  Table t{{"order", "exponent", "stderr"}, {}};
  for (std::size_t i = 0; i < e.size(); ++i) t.rows.push_back({e.orders[i], e.exponents[i], e.stderrs[i]});
  return t;
}

// chi^(1/(q-1)) per order in wide format; q = 1 has no such power and is left out.
inline Table plot_table(const PartitionCurve& c, const char* scale_name) {
  Table t;
  t.columns.push_back(scale_name);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < c.orders.size(); ++i) {
    if (std::abs(c.orders[i] - 1.0) < 1e-12) continue;
    rows.push_back(i);
    t.columns.push_back("order=" + format_double(c.orders[i]));
  }
  for (std::size_t j = 0; j < c.scales.size(); ++j) {
    std::vector<Cell> r{c.scales[j]};
    for (std::size_t i : rows) {
      if (c.missing(i, j)) r.emplace_back();
      else r.emplace_back(std::exp(c.at(i, j) / (c.orders[i] - 1.0)));
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline Table inversion_table(const InversionSide& s) {
  Table t{{"grid", "lhs", "rhs", "rhs_stderr", "diff"}, {}};
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    if (s.computed(i)) t.rows.push_back({s.grid[i], s.lhs[i], s.rhs[i], s.rhs_stderr[i], s.diff(i)});
    else t.rows.push_back({s.grid[i], s.lhs[i], Cell{}, Cell{}, Cell{}});
  }
  return t;
}

inline nlohmann::json side_json(const InversionSide& s) {
  return {{"max_abs_diff", s.max_abs_diff},
          {"within_error_bars", s.within_error_bars},
          {"coverage", s.coverage}};
}

inline void report_warnings(const std::vector<std::string>& w) {
  for (const auto& m : w) std::cerr << "warning: " << m << '\n';
}

inline void write_direct(OutputWriter& out, const DirectResult& d, const LoadedSeries& s) {
  out.table("direct_partition", partition_table(d.partition));
  out.json("direct_range", {{"lo", d.range.first},
                            {"hi", d.range.second},
                            {"detected", d.range_detected},
                            {"mean_r2", d.range_r2},
                            {"used_length", d.used_length},
                            {"original_length", s.original_length},
                            {"box_sizes", d.box_sizes}});
  out.table("direct_exponents", exponent_table(d.exponents));
  out.table("direct_plot", plot_table(d.partition, "scale"));
  Table spec{{"order", "alpha", "f"}, {}};
  for (const auto& p : d.spectrum) spec.rows.push_back({p.order, p.alpha, p.f});
  out.table("direct_spectrum", spec);
  report_warnings(d.partition.warnings);
  report_warnings(d.exponents.warnings);
}

inline void write_inverse(OutputWriter& out, const InverseResult& r, const VolatilitySeries& vol) {
  Table ex{{"threshold", "count", "mean", "std", "total_time"}, {}};
  for (const auto& e : r.exit_stats) {
    ex.rows.push_back({e.threshold, static_cast<long long>(e.count), e.mean, e.std_dev, e.total_time});
  }
  out.table("exit_times", ex);
  out.table("inverse_partition", partition_table(r.partition));
  out.json("inverse_range", {{"lo", r.range.first},
                             {"hi", r.range.second},
                             {"detected", r.range_detected},
                             {"mean_r2", r.range_r2},
                             {"v_mean", vol.mean},
                             {"total", vol.total},
                             {"used_length", vol.size()}});
  out.table("inverse_exponents", exponent_table(r.exponents));
  out.table("inverse_plot", plot_table(r.partition, "threshold"));
  report_warnings(r.partition.warnings);
  report_warnings(r.exponents.warnings);
}

}  // namespace detail

inline int cmd_cascade(const RunConfig& cfg) {
  cfg.validate();
  const CascadeSpec& spec = *cfg.input.cascade;
  const GeneratedMeasure g = generate_cascade(spec, cfg.input.depth, cfg.input.seed);
  OutputWriter out(cfg);
  Table m;
  if (g.widths.empty()) {
    m.columns = {"weight"};
    for (double w : g.weights) m.rows.push_back({w});
  } else {
    m.columns = {"weight", "width"};
    for (std::size_t k = 0; k < g.weights.size(); ++k) m.rows.push_back({g.weights[k], g.widths[k]});
  }
  out.table("measure", m);
  Table tau{{"order", "tau"}, {}};
  for (double q : order_grid(cfg.q_min, cfg.q_max, cfg.q_step)) tau.rows.push_back({q, analytic_tau(spec, q)});
  out.table("analytic_tau", tau);
  Table theta{{"order", "theta"}, {}};
  for (double p : order_grid(cfg.p_min, cfg.p_max, cfg.p_step)) {
    theta.rows.push_back({p, analytic_theta(spec, p)});
  }
  out.table("analytic_theta", theta);
  nlohmann::json js = mfinv::to_json(spec);
  js["depth"] = g.depth;
  js["boxes"] = g.weights.size();
  js["shuffled"] = g.shuffled;
  if (g.seed) js["seed"] = *g.seed;
  out.json("spec", js);
  std::cout << "cascade: " << g.weights.size() << " boxes written to " << cfg.out_dir << '\n';
  return 0;
}

inline int cmd_direct(const RunConfig& cfg) {
  cfg.validate();
  const LoadedSeries s = load_series(cfg.input);
  const DirectResult d = run_direct(s.vol, cfg.pipeline_options());
  OutputWriter out(cfg);
  detail::write_direct(out, d, s);
  std::cout << "direct: T=" << d.used_length << " range [" << d.range.first << ", " << d.range.second
            << "], " << d.exponents.size() << " exponents\n";
  return 0;
}

inline int cmd_inverse(const RunConfig& cfg) {
  cfg.validate();
  const LoadedSeries s = load_series(cfg.input);
  const InverseResult r = run_inverse(s.vol, cfg.pipeline_options());
  OutputWriter out(cfg);
  detail::write_inverse(out, r, s.vol);
  std::cout << "inverse: v_mean=" << s.vol.mean << " range [" << r.range.first << ", "
            << r.range.second << "], " << r.exponents.size() << " exponents\n";
  return 0;
}

/// Exit status 0 when the inversion formula holds within the error bars in
/// both directions, 2 when it does not.
inline int cmd_invert_check(const RunConfig& cfg, InvertCheckResult* result = nullptr) {
  cfg.validate();
  const LoadedSeries s = load_series(cfg.input);
  std::optional<LoadedSeries> other;
  if (cfg.inverse_input && !cfg.inverse_input->empty()) other = load_series(*cfg.inverse_input);
  const InvertCheckResult r =
      run_invert_check(s.vol, other ? &other->vol : nullptr, cfg.pipeline_options());

  OutputWriter out(cfg);
  detail::write_direct(out, r.direct, s);
  detail::write_inverse(out, r.inverse, other ? other->vol : s.vol);
  out.json("range_consistency", {{"direct_range", {r.direct.range.first, r.direct.range.second}},
                                 {"inverse_range", {r.inverse.range.first, r.inverse.range.second}},
                                 {"v_mean", r.v_mean},
                                 {"lower_ratio", r.consistency.lower_ratio},
                                 {"upper_ratio", r.consistency.upper_ratio},
                                 {"consistent", r.consistency.consistent}});
  out.table("inversion_tau", detail::inversion_table(r.report.tau_side));
  out.table("inversion_theta", detail::inversion_table(r.report.theta_side));
  out.json("inversion_summary", {{"max_abs_diff", r.report.max_abs_diff},
                                 {"within_error_bars", r.report.within_error_bars},
                                 {"coverage", r.report.coverage},
                                 {"reliable", r.report.reliable},
                                 {"tau_side", detail::side_json(r.report.tau_side)},
                                 {"theta_side", detail::side_json(r.report.theta_side)}});
  if (!r.report.reliable) std::cerr << "warning: inversion coverage below 0.3, report unreliable\n";
  std::cout << "invert-check: max_abs_diff=" << r.report.max_abs_diff
            << " within_error_bars=" << (r.report.within_error_bars ? "true" : "false")
            << " coverage=" << r.report.coverage
            << " ranges_consistent=" << (r.consistency.consistent ? "true" : "false") << '\n';
  if (result) *result = r;
  return r.report.within_error_bars ? 0 : 2;
}

inline int cmd_pdf(const RunConfig& cfg) {
  cfg.validate();
  const LoadedSeries s = load_series(cfg.input);
  OutputWriter out(cfg);
  Table t{{"threshold", "multiple", "bin_center", "density", "count"}, {}};
  nlohmann::json tails = nlohmann::json::array();
  for (double k : cfg.pdf_multiples) {
    const double dv = k * s.vol.mean;
    const PdfEstimate pdf = estimate_pdf(exit_times(s.vol, dv), cfg.binning, cfg.bins);
    detail::report_warnings(pdf.warnings);
    for (std::size_t b = 0; b < pdf.bin_centers.size(); ++b) {
      t.rows.push_back({dv, k, pdf.bin_centers[b], pdf.densities[b], static_cast<long long>(pdf.counts[b])});
    }
    const TailReport rep = tail_diagnostics(pdf);
    tails.push_back({{"threshold", dv},
                     {"multiple", k},
                     {"sigma", pdf.sigma},
                     {"n_samples", pdf.n_samples},
                     {"integral", pdf.integral()},
                     {"plateau_evaluated", rep.plateau_evaluated},
                     {"left_plateau", rep.left_plateau},
                     {"left_variation", rep.left_variation},
                     {"right_tail", to_string(rep.right_tail)},
                     {"semilog_r2", rep.semilog_r2},
                     {"loglog_r2", rep.loglog_r2},
                     {"semilog_slope", rep.semilog_slope},
                     {"loglog_slope", rep.loglog_slope}});
  }
  out.table("pdf", t);
  out.json("tail_diagnostics", {{"thresholds", tails}});
  std::cout << "pdf: " << cfg.pdf_multiples.size() << " thresholds written to " << cfg.out_dir << '\n';
  return 0;
}

}  // namespace mfinv
