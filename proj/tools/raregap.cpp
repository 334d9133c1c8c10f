// Command line front end: simulate scenario data, run the CDF-gap test or
// the fixed-time baseline on trajectory files, sweep statistic-vs-N curves,
// dump the estimated CDFs, and ingest raw detector/incident logs.
//
// Exit codes: 0 success, 2 usage error, 3 data error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "raregap/raregap.hpp"

namespace {

std::string fmt(double v) {
  std::string s;
  raregap::detail::append_double(s, v);
  return s;
}

std::string fmt_point(const raregap::StateVector& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ',';
    raregap::detail::append_double(s, p[i]);
  }
  return s;
}

int parse_hhmm(const std::string& s, const char* flag) {
  const auto digits = [](char c) { return c >= '0' && c <= '9'; };
  if (s.size() == 5 && s[2] == ':' && digits(s[0]) && digits(s[1]) && digits(s[3]) &&
      digits(s[4])) {
    const int hh = (s[0] - '0') * 10 + (s[1] - '0');
    const int mm = (s[3] - '0') * 10 + (s[4] - '0');
    if (hh <= 24 && mm <= 59) return hh * 60 + mm;
  }
  throw std::invalid_argument(std::string(flag) + ": expected HH:MM, got '" + s + "'");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot open file for writing");
  os << text;
  if (!os) throw std::runtime_error(path + ": write failed");
}

struct CommonArgs {
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::string method = "mc";
  int replications = 500;
  int workers = 1;
  std::string in, out;
};

raregap::TrajectoryDataset load_filtered(const std::string& path, std::size_t& excluded) {
  const raregap::TrajectoryDataset raw = raregap::read_trajectory_csv(path);
  raregap::TrajectoryDataset filtered = raw.event_bearing();
  excluded = raw.size() - filtered.size();
  return filtered;
}

// Optional overrides for the scenario presets.  Field names double as the
// CLI flag and config-file key names, so a flat key=value file maps onto the
// simulation parameters one to one.
struct ModelOverrides {
  std::optional<int> horizon;
  std::optional<double> mu0, mu1, inflow, noise_half_width, softmax_beta;
  std::vector<double> x0;
  std::optional<double> p, p_low, p_high, threshold;
  std::string aggregator;  // empty keeps the scenario default
};

// Each key only applies to scenarios whose event model uses it: p to the
// constant-rate models, the other three to the threshold models.
void apply_event_overrides(raregap::EventModel& m, const ModelOverrides& o) {
  using EM = raregap::EventModel;
  if (m.kind == EM::Kind::ConstantBernoulli) {
    if (o.p) m.p = *o.p;
    return;
  }
  if (o.p_low) m.p_low = *o.p_low;
  if (o.p_high) m.p_high = *o.p_high;
  if (o.threshold) m.threshold = *o.threshold;
  if (!o.aggregator.empty())
    m.aggregator = o.aggregator == "max-coordinate" ? EM::Aggregator::MaxCoordinate
                                                    : EM::Aggregator::AnyCoordinate;
}

int run_simulate(const CommonArgs& c, const std::string& scenario, std::size_t n, int links,
                 const ModelOverrides& o) {
  const raregap::Scenario sc = raregap::scenario_from_name(scenario);
  raregap::TrajectoryDataset ds = [&] {
    switch (sc) {
      case raregap::Scenario::SingleLinkNull:
      case raregap::Scenario::SingleLinkAlternative: {
        raregap::SingleLinkParams p = sc == raregap::Scenario::SingleLinkNull
                                          ? raregap::single_link_null_params()
                                          : raregap::single_link_alternative_params();
        if (o.horizon) p.horizon = *o.horizon;
        if (o.mu0) p.mu0 = *o.mu0;
        if (o.mu1) p.mu1 = *o.mu1;
        if (o.inflow) p.inflow = *o.inflow;
        if (o.noise_half_width) p.noise_half_width = *o.noise_half_width;
        if (!o.x0.empty()) {
          if (o.x0.size() != 1)
            throw std::invalid_argument("simulate: single-link x0 takes one value");
          p.x0 = o.x0[0];
        }
        apply_event_overrides(p.event_model, o);
        return raregap::simulate_single_link(p, n, c.seed);
      }
      case raregap::Scenario::MultiLinkNull:
      case raregap::Scenario::MultiLinkAlternative: {
        raregap::MultiLinkParams p = sc == raregap::Scenario::MultiLinkNull
                                         ? raregap::multi_link_null_params(links)
                                         : raregap::multi_link_alternative_params(links);
        if (o.horizon) p.horizon = *o.horizon;
        if (o.mu0) p.mu0 = *o.mu0;
        if (o.mu1) p.mu1 = *o.mu1;
        if (o.inflow) p.inflow = *o.inflow;
        if (o.noise_half_width) p.noise_half_width = *o.noise_half_width;
        if (o.softmax_beta) p.softmax_beta = *o.softmax_beta;
        if (!o.x0.empty()) p.x0 = o.x0;  // validate() enforces the dimension
        apply_event_overrides(p.event_model, o);
        return raregap::simulate_multi_link(p, n, c.seed);
      }
      default:
        throw std::invalid_argument("simulate: scenario must be one of the synthetic ones");
    }
  }();
  if (c.out.empty()) {
    raregap::write_trajectory_csv(std::cout, ds);
  } else {
    raregap::write_trajectory_csv(c.out, ds);
    std::cout << "wrote " << ds.size() << " trajectories to " << c.out << "\n";
  }
  return 0;
}

int run_test_cmd(const CommonArgs& c) {
  std::size_t excluded = 0;
  const raregap::TrajectoryDataset ds = load_filtered(c.in, excluded);
  const raregap::ThresholdMethod method = c.method == "dkw"
                                              ? raregap::ThresholdMethod::DkwConservative
                                              : raregap::ThresholdMethod::MonteCarloNull;
  const raregap::TestReport rep =
      raregap::run_test(ds, method, c.alpha, c.seed, c.replications, c.workers);

  std::string text;
  text += "statistic=" + fmt(rep.statistic) + "\n";
  text += "argmax=" + fmt_point(rep.argmax_point) + "\n";
  text += "threshold=" + fmt(rep.threshold) + "\n";
  text += std::string("method=") + (method == raregap::ThresholdMethod::DkwConservative
                                        ? "dkw"
                                        : "mc") + "\n";
  text += "alpha=" + fmt(rep.alpha) + "\n";
  if (rep.p_value) text += "p_value=" + fmt(*rep.p_value) + "\n";
  text += "n=" + std::to_string(rep.n_trajectories) + "\n";
  text += "excluded_no_event=" + std::to_string(excluded) + "\n";
  text += "grid_size=" + std::to_string(rep.grid_size) + "\n";
  text += std::string("decision=") + (rep.reject_h0 ? "reject" : "fail-to-reject") + "\n";
  std::cout << text;
  std::cout << "summary: " << (rep.reject_h0 ? "the state influences when the first event occurs"
                                             : "no detectable state influence")
            << " (gap " << fmt(rep.statistic) << " vs threshold " << fmt(rep.threshold)
            << ")\n";
  if (!c.out.empty()) write_text(c.out, text);
  return 0;
}

int run_baseline_cmd(const CommonArgs& c, int t_fixed) {
  std::size_t excluded = 0;
  const raregap::TrajectoryDataset ds = load_filtered(c.in, excluded);
  const raregap::BaselineReport rep = raregap::baseline_sup_gap(ds, t_fixed);
  std::string text;
  text += "statistic=" + fmt(rep.statistic) + "\n";
  text += "argmax=" + fmt_point(rep.argmax_point) + "\n";
  text += "t=" + std::to_string(rep.t_fixed) + "\n";
  text += "n_conditional=" + std::to_string(rep.n_conditional) + "\n";
  text += "n_total=" + std::to_string(rep.n_total) + "\n";
  text += "excluded_no_event=" + std::to_string(excluded) + "\n";
  std::cout << text;
  std::cout << "summary: fixed-time gap at t=" << rep.t_fixed << " is " << fmt(rep.statistic)
            << " from " << rep.n_conditional << " conditioning trajectories\n";
  if (!c.out.empty()) write_text(c.out, text);
  return 0;
}

int run_curves_cmd(const CommonArgs& c, const std::string& scenario,
                   std::vector<std::size_t> n_values, std::vector<std::uint64_t> seeds,
                   const std::vector<std::string>& methods, int baseline_t, int links) {
  raregap::ExperimentSpec spec;
  spec.scenario = raregap::scenario_from_name(scenario);
  spec.n_values = std::move(n_values);
  spec.seeds = std::move(seeds);
  spec.run_gap = false;
  spec.run_baseline = false;
  for (const std::string& m : methods) {
    if (m == "gap")
      spec.run_gap = true;
    else if (m == "baseline")
      spec.run_baseline = true;
    else
      throw std::invalid_argument("curves: unknown method '" + m + "'");
  }
  spec.baseline_t = baseline_t;
  spec.links = links;
  spec.input_csv = c.in;
  const std::vector<raregap::CurveCell> cells = raregap::run_curves(spec, c.workers);
  raregap::write_curves_csv(c.out, cells);
  std::cout << "wrote " << cells.size() << " cells to " << c.out << "\n";
  return 0;
}

int run_cdf_cmd(const CommonArgs& c, std::optional<int> baseline_t) {
  std::size_t excluded = 0;
  const raregap::TrajectoryDataset ds = load_filtered(c.in, excluded);
  const auto grid = raregap::shared_evaluation_grid(ds);
  const raregap::EmpiricalCdf b1 = raregap::pre_event_cdf(ds, grid);
  const raregap::EmpiricalCdf b2 = raregap::hazard_mixture_cdf(ds, grid);

  std::optional<std::vector<double>> cond, all;
  if (baseline_t) {
    if (*baseline_t < 1 || *baseline_t > ds.min_horizon())
      throw std::invalid_argument("cdf: --t outside the common horizon");
    std::vector<double> cs, as;
    std::size_t n_cond = 0;
    for (const raregap::Trajectory& tr : ds) {
      const auto p = tr.state(*baseline_t - 1);
      as.insert(as.end(), p.begin(), p.end());
      const raregap::FirstEventTime T = raregap::first_event_time(tr);
      if (T && *T == *baseline_t) {
        cs.insert(cs.end(), p.begin(), p.end());
        ++n_cond;
      }
    }
    if (n_cond == 0) throw std::runtime_error("conditional sample empty");
    cond = raregap::detail::sample_cdf_values(ds.dimension(), std::move(cs), *grid,
                                              static_cast<double>(n_cond));
    all = raregap::detail::sample_cdf_values(ds.dimension(), std::move(as), *grid,
                                             static_cast<double>(ds.size()));
  }

  std::string out;
  for (int d = 1; d <= ds.dimension(); ++d) out += "x_" + std::to_string(d) + ",";
  out += "pre_event,mixture";
  if (baseline_t) out += ",conditional_t,unconditional_t";
  out += '\n';
  for (std::size_t g = 0; g < grid->size(); ++g) {
    for (const double v : grid->point(g)) {
      raregap::detail::append_double(out, v);
      out += ',';
    }
    raregap::detail::append_double(out, b1.value(g));
    out += ',';
    raregap::detail::append_double(out, b2.value(g));
    if (baseline_t) {
      out += ',';
      raregap::detail::append_double(out, (*cond)[g]);
      out += ',';
      raregap::detail::append_double(out, (*all)[g]);
    }
    out += '\n';
  }
  if (c.out.empty())
    std::cout << out;
  else
    write_text(c.out, out);
  return 0;
}

int run_ingest_cmd(const CommonArgs& c, const std::string& detectors_path,
                   const std::string& incidents_path, const std::string& link,
                   const std::vector<std::string>& detector_ids,
                   const std::string& window_start, const std::string& window_end,
                   int bin_minutes, const std::string& missing_bin, bool keep_no_event) {
  raregap::IngestConfig cfg;
  cfg.window_start_minute = parse_hhmm(window_start, "--window-start");
  cfg.window_end_minute = parse_hhmm(window_end, "--window-end");
  cfg.bin_minutes = bin_minutes;
  cfg.link_id = link;
  cfg.detector_ids = detector_ids;
  cfg.drop_no_event = !keep_no_event;
  if (missing_bin == "drop-day")
    cfg.missing_bin_policy = raregap::IngestConfig::MissingBinPolicy::DropDay;
  else if (missing_bin == "interpolate")
    cfg.missing_bin_policy = raregap::IngestConfig::MissingBinPolicy::Interpolate;
  else
    throw std::invalid_argument("ingest: --missing-bin must be drop-day or interpolate");
  cfg.validate();

  const auto detectors = raregap::read_detector_csv(detectors_path);
  const auto incidents = raregap::read_incident_csv(incidents_path);
  const raregap::IngestResult result =
      raregap::build_daily_trajectories(detectors, incidents, cfg);
  raregap::write_trajectory_csv(c.out, result.dataset);

  std::cout << "days_kept=" << result.day_ids.size() << "\n";
  std::cout << "days_dropped_missing_bins=" << result.dropped_missing_bins.size() << "\n";
  std::cout << "days_dropped_no_event=" << result.dropped_no_event.size() << "\n";
  std::cout << "horizon=" << result.dataset.max_horizon() << "\n";
  std::cout << "out=" << c.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tests whether a system's state influences when its first rare event occurs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read option defaults from a key=value file");
  app.get_config_formatter_base()->valueSeparator('=');

  CommonArgs c;
  app.add_option("--seed", c.seed, "base random seed")->capture_default_str();
  app.add_option("--alpha", c.alpha, "test level")->check(CLI::Range(1e-9, 1.0 - 1e-9))
      ->capture_default_str();
  app.add_option("--method", c.method, "threshold method")
      ->check(CLI::IsMember({"dkw", "mc"}))
      ->capture_default_str();
  app.add_option("--replications", c.replications, "Monte-Carlo null replications")
      ->check(CLI::Range(100, 1000000))
      ->capture_default_str();
  app.add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1, 256))
      ->capture_default_str();
  app.add_option("--out", c.out, "output file");

  // Simulation model overrides (used by `simulate`; `curves` keeps the
  // registered scenario presets so sweeps stay comparable).  The long names
  // are also the flat config-file keys.
  ModelOverrides mo;
  int links = 2;
  const char* mg = "simulation model";
  app.add_option("--links", links, "links in multi-link scenarios")
      ->check(CLI::Range(2, 64))->capture_default_str()->group(mg);
  app.add_option("--horizon", mo.horizon, "steps per trajectory")
      ->check(CLI::PositiveNumber)->group(mg);
  app.add_option("--mu0", mo.mu0, "relaxation rate with no event at the previous step")
      ->group(mg);
  app.add_option("--mu1", mo.mu1, "relaxation rate after an event")->group(mg);
  app.add_option("--inflow", mo.inflow, "inflow per link (single) or total (multi)")
      ->group(mg);
  app.add_option("--noise_half_width", mo.noise_half_width, "half-width of the uniform noise")
      ->group(mg);
  app.add_option("--softmax_beta", mo.softmax_beta, "routing sharpness (multi-link)")
      ->group(mg);
  app.add_option("--x0", mo.x0, "initial state: one value, or comma-separated per link")
      ->delimiter(',')->group(mg);
  app.add_option("--p", mo.p, "event probability per step (constant-rate scenarios)")
      ->group(mg);
  app.add_option("--p_low", mo.p_low, "event probability below the threshold")->group(mg);
  app.add_option("--p_high", mo.p_high, "event probability at or above the threshold")
      ->group(mg);
  app.add_option("--threshold", mo.threshold, "state level switching p_low to p_high")
      ->group(mg);
  app.add_option("--aggregator", mo.aggregator,
                 "multi-link threshold comparison: any-coordinate or max-coordinate")
      ->check(CLI::IsMember({"any-coordinate", "max-coordinate"}))->group(mg);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate synthetic scenario trajectories");
  std::string sim_scenario = "single-link-null";
  std::size_t sim_n = 0;
  sim->add_option("--scenario", sim_scenario, "scenario name")
      ->check(CLI::IsMember({"single-link-null", "single-link-alt", "multi-link-null",
                             "multi-link-alt"}))
      ->capture_default_str();
  sim->add_option("--n", sim_n, "number of trajectories")->required()
      ->check(CLI::PositiveNumber);

  // test
  auto* test = app.add_subcommand("test", "run the CDF-gap test on a trajectory file");
  test->add_option("--in", c.in, "trajectory CSV")->required();

  // baseline
  auto* base = app.add_subcommand("baseline", "run the fixed-time comparison");
  int base_t = 1;
  base->add_option("--in", c.in, "trajectory CSV")->required();
  base->add_option("--t", base_t, "fixed step to condition on")->check(CLI::PositiveNumber)
      ->capture_default_str();

  // curves
  auto* curves = app.add_subcommand("curves", "sweep statistic vs sample size");
  std::string cur_scenario = "single-link-null";
  std::vector<std::size_t> cur_n;
  std::vector<std::uint64_t> cur_seeds;
  std::vector<std::string> cur_methods{"gap", "baseline"};
  int cur_baseline_t = 1;
  curves->add_option("--scenario", cur_scenario, "scenario name")
      ->check(CLI::IsMember({"single-link-null", "single-link-alt", "multi-link-null",
                             "multi-link-alt", "from-csv"}))
      ->capture_default_str();
  curves->add_option("--n", cur_n, "sample sizes (repeatable)")->required();
  curves->add_option("--seeds", cur_seeds, "seeds (repeatable)")->required();
  curves->add_option("--methods", cur_methods, "methods to run: gap, baseline")
      ->capture_default_str();
  curves->add_option("--t", cur_baseline_t, "baseline fixed step")->check(CLI::PositiveNumber)
      ->capture_default_str();
  curves->add_option("--in", c.in, "trajectory CSV for from-csv sweeps");

  // cdf
  auto* cdf = app.add_subcommand("cdf", "dump both estimated CDFs over the grid");
  std::optional<int> cdf_t;
  cdf->add_option("--in", c.in, "trajectory CSV")->required();
  cdf->add_option("--t", cdf_t, "also dump the fixed-time CDF pair at this step")
      ->check(CLI::PositiveNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "build daily trajectories from raw logs");
  std::string ing_detectors, ing_incidents, ing_link;
  std::vector<std::string> ing_detector_ids;
  std::string ing_start = "06:00", ing_end = "14:00", ing_missing = "drop-day";
  int ing_bin = 5;
  bool ing_keep_no_event = false;
  ingest->add_option("--detectors", ing_detectors, "detector flow CSV")->required();
  ingest->add_option("--incidents", ing_incidents, "incident CSV")->required();
  ingest->add_option("--link", ing_link, "incident link id filter");
  ingest->add_option("--detector-ids", ing_detector_ids, "detectors belonging to the link");
  ingest->add_option("--window-start", ing_start, "daily window start")->capture_default_str();
  ingest->add_option("--window-end", ing_end, "daily window end (exclusive)")
      ->capture_default_str();
  ingest->add_option("--bin-minutes", ing_bin, "bin width in minutes")
      ->check(CLI::PositiveNumber)->capture_default_str();
  ingest->add_option("--missing-bin", ing_missing, "policy: drop-day or interpolate")
      ->check(CLI::IsMember({"drop-day", "interpolate"}))->capture_default_str();
  ingest->add_flag("--keep-no-event", ing_keep_no_event, "keep days without incidents");

  // global options remain usable after the subcommand name
  for (CLI::App* s : {sim, test, base, curves, cdf, ingest}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return run_simulate(c, sim_scenario, sim_n, links, mo);
    if (*test) return run_test_cmd(c);
    if (*base) return run_baseline_cmd(c, base_t);
    if (*curves) {
      if (c.out.empty()) throw std::invalid_argument("curves: --out is required");
      return run_curves_cmd(c, cur_scenario, cur_n, cur_seeds, cur_methods, cur_baseline_t,
                            links);
    }
    if (*cdf) return run_cdf_cmd(c, cdf_t);
    if (*ingest) {
      if (c.out.empty()) throw std::invalid_argument("ingest: --out is required");
      return run_ingest_cmd(c, ing_detectors, ing_incidents, ing_link, ing_detector_ids,
                            ing_start, ing_end, ing_bin, ing_missing, ing_keep_no_event);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
