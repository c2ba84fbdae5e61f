// mfinv: direct and inverse multifractal analysis of volatility series and
// synthetic cascades.
//
// Exit status: 0 success, 1 error, 2 invert-check outside the error bars.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mfinv.hpp"

namespace {

struct SourceFlags {
  std::string path;
  std::string kind = "price";
  double drop_above = 0.0;
  std::vector<double> weights, ratios;
  int depth = 14;
  std::uint64_t seed = 0;
  bool has_seed = false, has_drop = false;
};

mfinv::InputSource to_source(const SourceFlags& f) {
  mfinv::InputSource s;
  if (!f.path.empty()) s.path = f.path;
  s.kind = f.kind == "volatility" ? mfinv::InputKind::volatility : mfinv::InputKind::price;
  if (f.has_drop) s.drop_above = f.drop_above;
  if (!f.weights.empty()) {
    mfinv::CascadeSpec spec;
    spec.weights = f.weights;
    spec.ratios = f.ratios;
    if (spec.ratios.empty()) spec.ratios.assign(f.weights.size(), 1.0 / static_cast<double>(f.weights.size()));
    s.cascade = spec;
  }
  s.depth = f.depth;
  if (f.has_seed) s.seed = f.seed;
  return s;
}

void add_source(CLI::App* sub, SourceFlags& f, const std::string& prefix) {
  const std::string p = prefix.empty() ? "--" : "--" + prefix + "-";
  sub->add_option(p + "input", f.path, "CSV file, one value per line (optional timestamp column)");
  sub->add_option(p + "input-kind", f.kind, "what the CSV holds")
      ->check(CLI::IsMember({"price", "volatility"}))
      ->capture_default_str();
  sub->add_option(p + "drop-above", f.drop_above, "discard returns with |r| above this value")
      ->each([&f](const std::string&) { f.has_drop = true; });
  sub->add_option(p + "cascade-weights", f.weights, "cascade probabilities m_i")->delimiter(',');
  sub->add_option(p + "cascade-ratios", f.ratios, "cascade ratios r_i (default 1/n each)")->delimiter(',');
  sub->add_option(p + "depth", f.depth, "cascade depth")->check(CLI::Range(1, 64))->capture_default_str();
  sub->add_option(p + "seed", f.seed, "shuffle branches per node with this seed")
      ->each([&f](const std::string&) { f.has_seed = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct and inverse multifractal analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option values (flags take precedence)");
  bool error_json = false;
  app.add_flag("--error-json", error_json, "print errors as JSON on stderr");

  mfinv::RunConfig cfg;
  SourceFlags src, inv_src;
  std::string format = "csv", binning = "log";
  double range_lo = 0, range_hi = 0, inv_lo = 0, inv_hi = 0;

  auto common = [&](CLI::App* sub, bool grids, bool ranges) {
    sub->add_option("--out", cfg.out_dir, "output directory")->envname("MFINV_OUT_DIR")->capture_default_str();
    sub->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    if (grids) {
      sub->add_option("--q-min", cfg.q_min)->capture_default_str();
      sub->add_option("--q-max", cfg.q_max)->capture_default_str();
      sub->add_option("--q-step", cfg.q_step)->capture_default_str();
      sub->add_option("--p-min", cfg.p_min)->capture_default_str();
      sub->add_option("--p-max", cfg.p_max)->capture_default_str();
      sub->add_option("--p-step", cfg.p_step)->capture_default_str();
    }
    if (ranges) {
      sub->add_option("--anchors", cfg.anchors, "orders averaged by range detection")->delimiter(',');
      sub->add_option("--range-lo", range_lo, "direct scaling range, smallest box size")
          ->each([&](const std::string&) { cfg.range_lo = range_lo; });
      sub->add_option("--range-hi", range_hi, "direct scaling range, largest box size")
          ->each([&](const std::string&) { cfg.range_hi = range_hi; });
      sub->add_option("--inverse-range-lo", inv_lo, "inverse scaling range, smallest threshold")
          ->each([&](const std::string&) { cfg.inverse_range_lo = inv_lo; });
      sub->add_option("--inverse-range-hi", inv_hi, "inverse scaling range, largest threshold")
          ->each([&](const std::string&) { cfg.inverse_range_hi = inv_hi; });
    }
  };

  auto* cascade = app.add_subcommand("cascade", "generate a cascade and its analytic exponents");
  add_source(cascade, src, "");
  common(cascade, true, false);

  auto* direct = app.add_subcommand("direct", "direct partition functions and tau(q)");
  add_source(direct, src, "");
  common(direct, true, true);

  auto* inverse = app.add_subcommand("inverse", "exit times, inverse partition functions and theta(p)");
  add_source(inverse, src, "");
  common(inverse, true, true);

  auto* check = app.add_subcommand("invert-check", "test tau(q) = -theta^{-1}(-q) in both directions");
  add_source(check, src, "");
  add_source(check, inv_src, "inverse");
  common(check, true, true);

  auto* pdf = app.add_subcommand("pdf", "exit-time densities and tail diagnostics");
  add_source(pdf, src, "");
  common(pdf, false, false);
  pdf->add_option("--threshold-multiples", cfg.pdf_multiples, "thresholds as multiples of v_mean")
      ->delimiter(',')
      ->capture_default_str();
  pdf->add_option("--binning", binning)->check(CLI::IsMember({"linear", "log"}))->capture_default_str();
  pdf->add_option("--bins", cfg.bins)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (error_json && e.get_exit_code() != 0) {
      std::cerr << nlohmann::json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << '\n';
      return 1;
    }
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    cfg.input = to_source(src);
    if (!inv_src.path.empty() || !inv_src.weights.empty()) cfg.inverse_input = to_source(inv_src);
    cfg.format = format == "json" ? mfinv::OutputFormat::json : mfinv::OutputFormat::csv;
    cfg.binning = binning == "linear" ? mfinv::Binning::linear : mfinv::Binning::log;
    cfg.command = app.get_subcommands().front()->get_name();

    if (cfg.command == "cascade") return mfinv::cmd_cascade(cfg);
    if (cfg.command == "direct") return mfinv::cmd_direct(cfg);
    if (cfg.command == "inverse") return mfinv::cmd_inverse(cfg);
    if (cfg.command == "invert-check") return mfinv::cmd_invert_check(cfg);
    return mfinv::cmd_pdf(cfg);
  } catch (const mfinv::Error& e) {
    if (error_json) {
      std::cerr << nlohmann::json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << '\n';
    } else {
      std::cerr << "mfinv: " << e.kind() << " error: " << e.what() << '\n';
    }
    return 1;
  } catch (const std::exception& e) {
    if (error_json) {
      std::cerr << nlohmann::json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    } else {
      std::cerr << "mfinv: " << e.what() << '\n';
    }
    return 1;
  }
}
