// trimix: simulations, exact computations, bound evaluations, observable
// analyses and scaling studies for the row-addition walk on unitriangular
// matrices over Z/mZ. Every run that writes files also writes a manifest with
// content digests; `trimix rerun` replays a manifest and verifies them.
//
// Exit codes: 0 success, 1 assertion-class failure, 2 usage error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "trimix/chain.hpp"
#include "trimix/estimators.hpp"
#include "trimix/exact.hpp"
#include "trimix/io.hpp"
#include "trimix/num.hpp"
#include "trimix/observables.hpp"
#include "trimix/schedule.hpp"
#include "trimix/spectral.hpp"
#include "trimix/util.hpp"

namespace fs = std::filesystem;
using namespace trimix;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split_list(text)) out.push_back(std::stod(tok));
  return out;
}

std::vector<i64> parse_ints(const std::string& text) {
  std::vector<i64> out;
  for (const auto& tok : split_list(text)) out.push_back(std::stoll(tok));
  return out;
}

std::uint64_t env_seed_fallback() {
  if (const char* env = std::getenv("TRIMIX_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

Variant parse_variant(const std::string& name) {
  if (name == "discrete") return Variant::discrete;
  if (name == "continuous") return Variant::continuous;
  throw CLI::ValidationError("--variant", "must be 'discrete' or 'continuous'");
}

// Collects output files as they are written and finalizes the manifest.
class RunRecorder {
 public:
  RunRecorder(std::string command, std::vector<std::string> effective_args, fs::path out_dir,
              std::uint64_t seed, int threads)
      : manifest_(), out_dir_(std::move(out_dir)) {
    manifest_.command = std::move(command);
    manifest_.argv = std::move(effective_args);
    manifest_.seed = seed;
    manifest_.threads = threads;
    manifest_.started_at = now_iso8601();
    fs::create_directories(out_dir_);
  }

  fs::path dir() const { return out_dir_; }

  fs::path path_for(const std::string& name) const { return out_dir_ / name; }

  void record(const std::string& name) {
    manifest_.outputs.push_back({name, sha256_file((out_dir_ / name).string())});
  }

  void finalize() {
    manifest_.finished_at = now_iso8601();
    write_manifest_file((out_dir_ / "manifest.json").string(), manifest_);
  }

 private:
  RunManifest manifest_;
  fs::path out_dir_;
};

int dispatch(const std::vector<std::string>& raw_args);

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
  int n = 3;
  i64 m = 3;
  std::string variant = "continuous";
  double horizon = 10.0;
  i64 replicas = 1;
  std::uint64_t seed = env_seed_fallback();
  std::string out = "trimix_out";
  std::string start;
  int threads = default_threads();
};

int cmd_simulate(const SimulateOpts& opts, const std::vector<std::string>& effective_args) {
  ChainConfig base;
  base.n = opts.n;
  base.m = opts.m;
  base.variant = parse_variant(opts.variant);
  base.horizon = opts.horizon;
  base.seed = opts.seed;
  if (!opts.start.empty()) base.start_upper = parse_ints(opts.start);
  base.validate();
  if (opts.replicas < 1) throw CLI::ValidationError("--replicas", "must be >= 1");

  RunRecorder rec("simulate", effective_args, opts.out, opts.seed, opts.threads);
  std::vector<std::string> names(static_cast<std::size_t>(opts.replicas));
  parallel_for(opts.replicas, opts.threads, [&](i64 r) {
    ChainConfig cfg = base;
    cfg.stream = static_cast<std::uint64_t>(r);
    const Trajectory traj = simulate(cfg);
    char name[64];
    std::snprintf(name, sizeof(name), "sim_r%04lld.jsonl", static_cast<long long>(r));
    write_event_log_file(rec.path_for(name).string(), traj.log);
    names[static_cast<std::size_t>(r)] = name;
  });
  for (const auto& name : names) rec.record(name);
  rec.finalize();
  std::printf("simulate: wrote %lld event log(s) to %s\n", static_cast<long long>(opts.replicas),
              rec.dir().string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// exact-tv and tmix
// ---------------------------------------------------------------------------

struct ExactTvOpts {
  int n = 3;
  i64 m = 3;
  i64 t_max = 100;
  std::string variant = "discrete";
  std::string times;  // continuous query times
  std::string out = "trimix_out";
  int threads = default_threads();
};

int cmd_exact_tv(const ExactTvOpts& opts, const std::vector<std::string>& effective_args) {
  RunRecorder rec("exact-tv", effective_args, opts.out, 0, opts.threads);
  const std::string name = "exact_tv.csv";
  CsvWriter csv(rec.path_for(name).string(), {"t", "tv"});
  if (parse_variant(opts.variant) == Variant::discrete) {
    const std::vector<double> series = exact_tv_series(opts.n, opts.m, opts.t_max);
    for (std::size_t t = 0; t < series.size(); ++t)
      csv.row({std::to_string(t), format_double(series[t])});
  } else {
    const std::vector<double> times =
        opts.times.empty() ? std::vector<double>{0, 1, 2, 5, 10, 20} : parse_doubles(opts.times);
    TransitionOperator op(opts.n, opts.m);
    for (double t : times) {
      const ContinuousDist dist = exact_dist_continuous(op, t);
      csv.row({format_double(t), format_double(tv_from_uniform(dist.p))});
    }
  }
  rec.record(name);
  rec.finalize();
  std::printf("exact-tv: wrote %s\n", rec.path_for(name).string().c_str());
  return kExitOk;
}

struct TmixOpts {
  int n = 3;
  std::string m_list = "3,5,7,9,11";
  double eps = 0.25;
  std::string out = "trimix_out";
  int threads = default_threads();
};

int cmd_tmix(const TmixOpts& opts, const std::vector<std::string>& effective_args) {
  RunRecorder rec("tmix", effective_args, opts.out, 0, opts.threads);
  const std::string name = "tmix.csv";
  CsvWriter csv(rec.path_for(name).string(), {"n", "m", "eps", "t_mix"});
  std::vector<double> log_m, log_t;
  for (i64 m : parse_ints(opts.m_list)) {
    const i64 t = t_mix_exact(opts.n, m, opts.eps);
    csv.row({std::to_string(opts.n), std::to_string(m), format_double(opts.eps),
             std::to_string(t)});
    log_m.push_back(std::log(static_cast<double>(m)));
    log_t.push_back(std::log(static_cast<double>(t)));
  }
  rec.record(name);
  if (log_m.size() >= 2) {
    const LinearFit fit = least_squares(log_m, log_t);
    json j;
    j["fit"] = {{"exponent", fit.slope}, {"slope_se", fit.slope_se}, {"points", fit.points}};
    std::ofstream out(rec.path_for("tmix_fit.json"));
    out << j.dump(2) << "\n";
    out.close();
    rec.record("tmix_fit.json");
    std::printf("tmix: fitted exponent %.4f over %d points\n", fit.slope, fit.points);
  }
  rec.finalize();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// spectral
// ---------------------------------------------------------------------------

struct SpectralOpts {
  int n = 3;
  i64 m = 3;
  double horizon = 8.0;
  i64 replicas = 100;
  std::uint64_t seed = env_seed_fallback();
  std::string out = "trimix_out";
  int threads = default_threads();
};

int cmd_spectral(const SpectralOpts& opts, const std::vector<std::string>& effective_args) {
  RunRecorder rec("spectral", effective_args, opts.out, opts.seed, opts.threads);
  const std::string name = "spectral.csv";
  CsvWriter csv(rec.path_for(name).string(),
                {"replica", "k", "l2_bound", "l2_exact_sum", "four_tv_sq", "exact_route_ok",
                 "exp_route_ok"});

  struct Row {
    i64 k;
    double bound, exact_sum, four_tv_sq;
  };
  std::vector<Row> rows(static_cast<std::size_t>(opts.replicas));
  parallel_for(opts.replicas, opts.threads, [&](i64 r) {
    ChainConfig cfg;
    cfg.n = opts.n;
    cfg.m = opts.m;
    cfg.variant = Variant::continuous;
    cfg.horizon = opts.horizon;
    cfg.seed = opts.seed;
    cfg.stream = static_cast<std::uint64_t>(r);
    const Trajectory traj = simulate_continuous(cfg);
    const ConditionalSpectrum spec = conditional_spectrum(traj.log, opts.horizon);
    const double tv = conditional_exact_tv(spec);
    rows[static_cast<std::size_t>(r)] =
        Row{spec.k(), l2_bound(spec), l2_exact_sum(spec), 4.0 * tv * tv};
  });

  i64 exact_failures = 0;
  i64 exp_failures = 0;
  for (i64 r = 0; r < opts.replicas; ++r) {
    const Row& row = rows[static_cast<std::size_t>(r)];
    const bool exact_ok = row.four_tv_sq <= row.exact_sum + 1e-9;
    const bool exp_ok = row.four_tv_sq <= row.bound + 1e-9;
    if (!exact_ok) ++exact_failures;
    if (!exp_ok) ++exp_failures;
    csv.row({std::to_string(r), std::to_string(row.k), format_double(row.bound),
             format_double(row.exact_sum), format_double(row.four_tv_sq),
             exact_ok ? "1" : "0", exp_ok ? "1" : "0"});
  }
  rec.record(name);
  rec.finalize();
  std::printf("spectral: %lld replicas; exact-route dominance failures %lld; "
              "exponential-form failures %lld (reported, not asserted)\n",
              static_cast<long long>(opts.replicas), static_cast<long long>(exact_failures),
              static_cast<long long>(exp_failures));
  return exact_failures == 0 ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------------------
// observe
// ---------------------------------------------------------------------------

struct ObserveOpts {
  std::string check;
  std::string log;
  int n = 4;
  i64 m = 3;
  double horizon = 8.0;
  i64 replicas = 200;
  std::uint64_t seed = env_seed_fallback();
  std::string y;
  int row = 2;
  int induced_row = 0;  // 0 = every I in {2..n}
  double L = 5.0;
  double g = 15.0;
  i64 x_threshold = 0;
  double t = -1.0;
  i64 k = 1;
  std::string entry;  // "i,j" for theta
  std::string out = "trimix_out";
  int threads = default_threads();
};

ResidueVector parse_y(const ObserveOpts& opts, int n, i64 m) {
  if (opts.y.empty()) return unit_vector(n, m, n);  // default observable: e_n
  auto vals = parse_ints(opts.y);
  return observable_vector(std::move(vals), m);
}

int cmd_observe(const ObserveOpts& opts, const std::vector<std::string>& effective_args) {
  RunRecorder rec("observe", effective_args, opts.out, opts.seed, opts.threads);

  // generation-based statistical checks; summaries use the long CSV format
  // (replica, statistic, value)
  if (opts.check == "separating" || opts.check == "backwards-identity") {
    const std::string name = "observe_" + opts.check + ".csv";
    const bool separating = opts.check == "separating";
    CsvWriter csv(rec.path_for(name).string(), {"replica", "statistic", "value"});
    i64 failures = 0;
    for (i64 r = 0; r < opts.replicas; ++r) {
      ChainConfig cfg;
      cfg.n = opts.n;
      cfg.m = opts.m;
      cfg.variant = Variant::continuous;
      cfg.horizon = opts.horizon;
      cfg.seed = opts.seed;
      cfg.stream = static_cast<std::uint64_t>(r);
      const std::vector<double> queries{opts.horizon / 4, opts.horizon / 2,
                                        3 * opts.horizon / 4, opts.horizon};
      if (separating) {
        const Trajectory traj = simulate_continuous(cfg, queries);
        const SeparationReport report = decompose_first_row(traj);
        if (!report.ok) ++failures;
        csv.row({std::to_string(r), "separating_ok", report.ok ? "1" : "0"});
      } else {
        const Trajectory traj = simulate_continuous(cfg);
        const ResidueVector y = parse_y(opts, opts.n, opts.m);
        const int lo = opts.induced_row == 0 ? 2 : opts.induced_row;
        const int hi = opts.induced_row == 0 ? opts.n : opts.induced_row;
        for (int induced = lo; induced <= hi; ++induced) {
          const BackwardsReport report = backwards_identity_check(traj.log, y, induced, queries);
          if (!report.ok || !report.zero_block_ok) ++failures;
          const std::string suffix = "_I" + std::to_string(induced);
          csv.row({std::to_string(r), "backwards_ok" + suffix, report.ok ? "1" : "0"});
          csv.row({std::to_string(r), "zero_block_ok" + suffix, report.zero_block_ok ? "1" : "0"});
          csv.row({std::to_string(r), "qualifying_rings" + suffix,
                   std::to_string(report.qualifying_rings)});
        }
      }
    }
    rec.record(name);
    rec.finalize();
    std::printf("observe %s: %lld failures over %lld replicas\n", opts.check.c_str(),
                static_cast<long long>(failures), static_cast<long long>(opts.replicas));
    return failures == 0 ? kExitOk : kExitAssertion;
  }

  if (opts.check == "induction") {
    const double t = opts.t < 0 ? opts.horizon : opts.t;
    const InductionReport rep =
        induction_probe(opts.n, opts.m, t, opts.replicas, opts.seed, opts.threads);
    json j;
    j["schema_version"] = 1;
    j["n"] = rep.n;
    j["m"] = rep.m;
    j["t"] = rep.t;
    j["lhs"] = rep.lhs;
    j["d_lower"] = rep.d_lower;
    j["q_mean"] = rep.q_mean;
    j["q_se"] = rep.q_se;
    j["rhs"] = rep.rhs;
    j["slack"] = rep.slack;
    j["ok"] = rep.ok;
    const std::string name = "observe_induction.json";
    {
      std::ofstream out(rec.path_for(name));
      out << j.dump(2) << "\n";
    }
    rec.record(name);
    rec.finalize();
    std::printf("observe induction: lhs=%.6f rhs=%.6f (+3se) slack=%.6f %s\n", rep.lhs, rep.rhs,
                rep.slack, rep.ok ? "ok" : "VIOLATED");
    return rep.ok ? kExitOk : kExitAssertion;
  }

  // log-based analyses
  if (opts.log.empty())
    throw CLI::ValidationError("--log", "required for check '" + opts.check + "'");
  const EventLog log = read_event_log_file(opts.log);
  const double horizon = log.config.horizon;
  const double t = opts.t < 0 ? horizon : opts.t;
  json j;
  j["schema_version"] = 1;
  j["check"] = opts.check;

  if (opts.check == "track-z") {
    const ZTrace trace = track_Z(log, parse_y(opts, log.config.n, log.config.m), opts.row);
    j["initial"] = trace.initial;
    j["changes"] = json::array();
    for (const auto& [time, val] : trace.changes) j["changes"].push_back({{"t", time}, {"value", val}});
  } else if (opts.check == "intervals") {
    const auto records =
        detect_intervals(track_Z(log, parse_y(opts, log.config.n, log.config.m), opts.row));
    j["intervals"] = json::array();
    for (const auto& recd : records)
      j["intervals"].push_back({{"kind", recd.kind == IntervalKind::zero ? "zero" : "nonzero"},
                                {"start", recd.start},
                                {"end", recd.end},
                                {"truncated", recd.truncated}});
  } else if (opts.check == "good-intervals") {
    const int induced = opts.induced_row == 0 ? log.config.n : opts.induced_row;
    const GoodIntervalReport report = good_intervals(
        track_Z(log, parse_y(opts, log.config.n, log.config.m), induced), log.config.n, opts.L,
        opts.g);
    j["L"] = report.L;
    j["g"] = report.g;
    j["t0"] = report.t0;
    j["x_derived"] = report.x_derived;
    j["good_count"] = report.good_count;
    j["fraction"] = report.fraction;
    j["windows"] = json::array();
    for (const auto& w : report.windows)
      j["windows"].push_back({{"t_lo", w.t_lo},
                              {"t_hi", w.t_hi},
                              {"nonzero_measure", w.nonzero_measure},
                              {"good", w.good}});
  } else if (opts.check == "ring-counter") {
    j["count"] = ring_counter_A(log, parse_y(opts, log.config.n, log.config.m), opts.x_threshold, t);
    j["t"] = t;
    j["x"] = opts.x_threshold;
  } else if (opts.check == "corner") {
    const ScalarTrace trace = corner_process(log);
    j["initial"] = trace.initial;
    j["changes"] = json::array();
    for (const auto& [time, val] : trace.changes) j["changes"].push_back({{"t", time}, {"value", val}});
  } else if (opts.check == "east") {
    const ColumnTrace trace = east_column(log);
    j["initial"] = trace.initial.coords;
    j["changes"] = json::array();
    for (const auto& [time, col] : trace.changes)
      j["changes"].push_back({{"t", time}, {"column", col.coords}});
  } else if (opts.check == "column-z") {
    const IntegerColumnTrace trace = column_over_Z(log);
    j["initial"] = trace.initial;
    j["max_abs"] = json::object();
    for (int k = 1; k < log.config.n; ++k)
      j["max_abs"][std::to_string(k)] = integer_column_max(trace, t, k);
  } else {
    throw CLI::ValidationError("--check", "unknown check '" + opts.check + "'");
  }

  const std::string name = "observe_" + opts.check + ".json";
  {
    std::ofstream out(rec.path_for(name));
    out << j.dump(2) << "\n";
  }
  rec.record(name);
  rec.finalize();
  std::printf("observe %s: wrote %s\n", opts.check.c_str(), rec.path_for(name).string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// theta (small standalone estimator over replicas)
// ---------------------------------------------------------------------------

struct ThetaOpts {
  int n = 4;
  i64 m = 5;
  double t = 5.0;
  i64 replicas = 10000;
  std::uint64_t seed = env_seed_fallback();
  int entry_i = 1;
  int entry_j = 0;  // 0 = (1, n) corner
  i64 k = 1;
  std::string out = "trimix_out";
  int threads = default_threads();
};

int cmd_theta(const ThetaOpts& opts, const std::vector<std::string>& effective_args) {
  RunRecorder rec("theta", effective_args, opts.out, opts.seed, opts.threads);
  const int jcol = opts.entry_j == 0 ? opts.n : opts.entry_j;
  std::vector<i64> cells(static_cast<std::size_t>(opts.replicas));
  parallel_for(opts.replicas, opts.threads, [&](i64 r) {
    ChainConfig cfg;
    cfg.n = opts.n;
    cfg.m = opts.m;
    cfg.variant = Variant::continuous;
    cfg.horizon = opts.t;
    cfg.seed = opts.seed;
    cfg.stream = static_cast<std::uint64_t>(r);
    const Trajectory traj = simulate_continuous(cfg, {opts.t});
    cells[static_cast<std::size_t>(r)] = traj.states[0].at(opts.entry_i, jcol);
  });
  std::vector<i64> counts(static_cast<std::size_t>(opts.m), 0);
  for (i64 c : cells) counts[static_cast<std::size_t>(c)] += 1;
  json j;
  j["schema_version"] = 1;
  j["entry"] = {opts.entry_i, jcol};
  j["t"] = opts.t;
  j["k"] = opts.k;
  j["theta_k"] = theta_k(counts, opts.k);
  j["counts"] = counts;
  const std::string name = "theta.json";
  {
    std::ofstream out(rec.path_for(name));
    out << j.dump(2) << "\n";
  }
  rec.record(name);
  rec.finalize();
  std::printf("theta: theta_%lld = %.6f\n", static_cast<long long>(opts.k),
              j["theta_k"].get<double>());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct BoundsOpts {
  std::string lemma = "integral";
  i64 m_min = 2;
  i64 m_max = 200;
  std::string x_grid = "0.1,0.5,1,5,20";
  int n = 4;
  i64 m = 5;
  std::string k_grid = "1,10,100,1000";
  i64 trials = 0;  // Monte Carlo trials for the expon suite (0 = exact only)
  std::string variant = "prime";
  double ktilde = 8.0;
  double kconst = 1.0;
  double beta = 1.0;
  std::string out = "trimix_out";
  int threads = default_threads();
};

int cmd_bounds(const BoundsOpts& opts, const std::vector<std::string>& effective_args) {
  RunRecorder rec("bounds", effective_args, opts.out, 0, opts.threads);
  if (opts.lemma == "integral") {
    const std::string name = "bounds_integral.csv";
    CsvWriter csv(rec.path_for(name).string(), {"x", "m", "lhs", "rhs", "ok"});
    i64 failures = 0;
    for (double x : parse_doubles(opts.x_grid)) {
      for (i64 m = opts.m_min; m <= opts.m_max; ++m) {
        const SpectralSumBound b = spectral_sum_bound(x, m);
        const bool ok = b.lhs <= b.rhs + 1e-9;
        if (!ok) ++failures;
        csv.row({format_double(x), std::to_string(m), format_double(b.lhs), format_double(b.rhs),
                 ok ? "1" : "0"});
      }
    }
    rec.record(name);
    rec.finalize();
    std::printf("bounds integral: %lld violations\n", static_cast<long long>(failures));
    return failures == 0 ? kExitOk : kExitAssertion;
  }
  if (opts.lemma == "q") {
    ScheduleConstants consts;
    consts.Ktilde = opts.ktilde;
    consts.K = opts.kconst;
    consts.beta = opts.beta;
    const Schedule sched = schedule_eval(
        opts.n, opts.m,
        opts.variant == "prime" ? ScheduleVariant::prime : ScheduleVariant::general, consts);
    const std::string name = "bounds_q.csv";
    CsvWriter csv(rec.path_for(name).string(),
                  {"k", "term_e1", "term_P2", "term_QI", "term_WI", "total"});
    json rows = json::array();
    for (double k : parse_doubles(opts.k_grid)) {
      const BoundBreakdown b = class_bound_terms(opts.n, opts.m, k, sched);
      csv.row({format_double(k), format_double(b.term_e1), format_double(b.term_P2),
               format_double(b.term_QI), format_double(b.term_WI), format_double(b.total)});
      rows.push_back({{"k", k},
                      {"term_e1", b.term_e1},
                      {"term_P2", b.term_P2},
                      {"term_QI", b.term_QI},
                      {"term_WI", b.term_WI},
                      {"total", b.total}});
    }
    rec.record(name);
    {
      json j;
      j["schema_version"] = 1;
      j["breakdown"] = rows;
      std::ofstream out(rec.path_for("bounds_q.json"));
      out << j.dump(2) << "\n";
    }
    rec.record("bounds_q.json");
    rec.finalize();
    std::printf("bounds q: wrote %s\n", rec.path_for(name).string().c_str());
    return kExitOk;
  }
  if (opts.lemma == "expon") {
    std::vector<int> ks;
    for (i64 k : parse_ints(opts.k_grid)) ks.push_back(static_cast<int>(k));
    const auto rows = expon_tail_check(ks, opts.trials, 1);
    const std::string name = "bounds_expon.csv";
    CsvWriter csv(rec.path_for(name).string(),
                  {"k", "upper_exact", "upper_bound", "upper_mc", "lower_exact", "lower_bound",
                   "lower_mc", "ok"});
    i64 failures = 0;
    for (const auto& row : rows) {
      if (!row.exact_within_bounds) ++failures;
      csv.row({std::to_string(row.k), format_double(row.upper_exact),
               format_double(row.upper_bound), format_double(row.upper_mc),
               format_double(row.lower_exact), format_double(row.lower_bound),
               format_double(row.lower_mc), row.exact_within_bounds ? "1" : "0"});
    }
    rec.record(name);
    rec.finalize();
    std::printf("bounds expon: %lld violations over %zu k values\n",
                static_cast<long long>(failures), rows.size());
    return failures == 0 ? kExitOk : kExitAssertion;
  }
  throw CLI::ValidationError("--lemma", "unknown lemma '" + opts.lemma + "'");
}

// ---------------------------------------------------------------------------
// scaling
// ---------------------------------------------------------------------------

struct ScalingCmdOpts {
  std::string points = "3:3,5,7,9,11";  // n:m1,m2,...; repeatable with ';'
  double eps = 0.25;
  i64 replicas = 4000;
  i64 budget = 64;
  std::uint64_t seed = env_seed_fallback();
  std::string out = "trimix_out";
  int threads = default_threads();
};

int cmd_scaling(const ScalingCmdOpts& opts, const std::vector<std::string>& effective_args) {
  std::vector<std::pair<int, i64>> grid;
  std::stringstream groups(opts.points);
  std::string group;
  while (std::getline(groups, group, ';')) {
    const auto colon = group.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--points", "expected 'n:m1,m2,...' groups");
    const int n = std::stoi(group.substr(0, colon));
    for (i64 m : parse_ints(group.substr(colon + 1))) grid.emplace_back(n, m);
  }
  if (grid.empty()) throw CLI::ValidationError("--points", "no grid points parsed");

  ScalingOptions sopts;
  sopts.replicas_per_probe = opts.replicas;
  sopts.probe_budget = opts.budget;
  sopts.seed = opts.seed == 0 ? 1 : opts.seed;
  sopts.threads = opts.threads;

  RunRecorder rec("scaling", effective_args, opts.out, sopts.seed, opts.threads);
  const std::string name = "scaling.csv";
  CsvWriter csv(rec.path_for(name).string(),
                {"n", "m", "eps", "t_lo", "t_hi", "t_point", "replicas", "seed", "method",
                 "complete"});
  const auto rows = scaling_study(grid, opts.eps, sopts);
  bool incomplete = false;
  for (const auto& row : rows) {
    if (!row.complete) incomplete = true;
    csv.row({std::to_string(row.n), std::to_string(row.m), format_double(row.eps),
             format_double(row.t_lo), format_double(row.t_hi), format_double(row.t_point),
             std::to_string(row.replicas), std::to_string(row.seed), row.method,
             row.complete ? "1" : "0"});
  }
  rec.record(name);

  const ScalingFit m_fit = fit_exponent(rows, true);
  json j;
  j["schema_version"] = 1;
  if (m_fit.valid)
    j["m_exponent"] = {{"exponent", m_fit.exponent},
                       {"se", m_fit.se},
                       {"ci_lo", m_fit.ci_lo},
                       {"ci_hi", m_fit.ci_hi},
                       {"points", m_fit.points}};
  {
    std::ofstream out(rec.path_for("scaling_fit.json"));
    out << j.dump(2) << "\n";
  }
  rec.record("scaling_fit.json");
  rec.finalize();
  if (incomplete) std::printf("scaling: budget exhausted on some points (flagged in CSV)\n");
  if (m_fit.valid) std::printf("scaling: fitted m-exponent %.4f\n", m_fit.exponent);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// rerun
// ---------------------------------------------------------------------------

struct RerunOpts {
  std::string manifest;
  std::string out;
};

int cmd_rerun(const RerunOpts& opts) {
  const RunManifest manifest = read_manifest_file(opts.manifest);
  const fs::path fresh_dir =
      opts.out.empty() ? fs::path(opts.manifest).parent_path() / "rerun_check" : fs::path(opts.out);

  // reconstruct the recorded command line with a fresh output directory
  std::vector<std::string> args;
  args.push_back(manifest.command);
  for (std::size_t i = 1; i < manifest.argv.size(); ++i) {
    if (manifest.argv[i] == "--out") {
      ++i;  // skip recorded value
      continue;
    }
    args.push_back(manifest.argv[i]);
  }
  args.push_back("--out");
  args.push_back(fresh_dir.string());

  const int code = dispatch(args);
  if (code != kExitOk) {
    std::fprintf(stderr, "rerun: re-execution exited with %d\n", code);
    return code == kExitUsage ? kExitUsage : kExitAssertion;
  }

  i64 mismatches = 0;
  for (const auto& out : manifest.outputs) {
    const fs::path candidate = fresh_dir / out.path;
    if (!fs::exists(candidate)) {
      std::fprintf(stderr, "rerun: missing output %s\n", out.path.c_str());
      ++mismatches;
      continue;
    }
    const std::string digest = sha256_file(candidate.string());
    if (digest != out.sha256) {
      std::fprintf(stderr, "rerun: digest mismatch for %s\n", out.path.c_str());
      ++mismatches;
    }
  }
  std::printf("rerun: %zu outputs checked, %lld mismatches\n", manifest.outputs.size(),
              static_cast<long long>(mismatches));
  return mismatches == 0 ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------------------
// argument plumbing
// ---------------------------------------------------------------------------

// expand `--config file.json` into explicit flags placed right after the
// subcommand, so explicit flags later on the line win
std::vector<std::string> expand_config(const std::vector<std::string>& raw) {
  std::vector<std::string> args;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::string& tok = raw[i];
    if (tok == "--config") {
      if (i + 1 >= raw.size()) throw std::runtime_error("--config needs a file argument");
      config_path = raw[++i];
    } else if (tok.rfind("--config=", 0) == 0) {
      config_path = tok.substr(9);
    } else {
      args.push_back(tok);
    }
  }
  if (!config_path) return args;
  if (args.empty()) throw std::runtime_error("--config requires a subcommand");

  std::ifstream in(*config_path);
  if (!in) throw std::runtime_error("cannot open config file: " + *config_path);
  json j;
  in >> j;
  if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");

  std::vector<std::string> expanded;
  expanded.push_back(args[0]);
  for (const auto& [key, value] : j.items()) {
    expanded.push_back("--" + key);
    if (value.is_boolean()) {
      expanded.back() += value.get<bool>() ? "=true" : "=false";
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ",";
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      expanded.push_back(joined);
    } else if (value.is_string()) {
      expanded.push_back(value.get<std::string>());
    } else {
      expanded.push_back(value.dump());
    }
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

int dispatch(const std::vector<std::string>& raw_args) {
  const std::vector<std::string> args = expand_config(raw_args);

  CLI::App app{"simulation and verification lab for the row-addition walk on "
               "unitriangular matrices over Z/mZ"};
  app.require_subcommand(1);

  auto take_last = [](CLI::Option* opt) { opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); };

  SimulateOpts sim;
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "simulate chains, write event logs");
  take_last(simulate_cmd->add_option("--n", sim.n, "matrix dimension (>= 2)"));
  take_last(simulate_cmd->add_option("--m", sim.m, "modulus (>= 2)")->required());
  take_last(simulate_cmd->add_option("--variant", sim.variant, "discrete|continuous"));
  take_last(simulate_cmd->add_option("--horizon", sim.horizon, "time horizon / step count"));
  take_last(simulate_cmd->add_option("--replicas", sim.replicas, "number of replicas"));
  take_last(simulate_cmd->add_option("--seed", sim.seed, "base seed (TRIMIX_SEED fallback)"));
  take_last(simulate_cmd->add_option("--start", sim.start,
                                     "start state: above-diagonal entries, row-major"));
  take_last(simulate_cmd->add_option("--out", sim.out, "output directory"));
  take_last(simulate_cmd->add_option("--threads", sim.threads, "worker threads"));

  ExactTvOpts etv;
  CLI::App* exact_cmd = app.add_subcommand("exact-tv", "exact TV distance series");
  take_last(exact_cmd->add_option("--n", etv.n, "matrix dimension"));
  take_last(exact_cmd->add_option("--m", etv.m, "modulus")->required());
  take_last(exact_cmd->add_option("--t-max", etv.t_max, "max discrete step"));
  take_last(exact_cmd->add_option("--variant", etv.variant, "discrete|continuous"));
  take_last(exact_cmd->add_option("--times", etv.times, "continuous query times, comma separated"));
  take_last(exact_cmd->add_option("--out", etv.out, "output directory"));
  take_last(exact_cmd->add_option("--threads", etv.threads, "worker threads"));

  TmixOpts tmix;
  CLI::App* tmix_cmd = app.add_subcommand("tmix", "exact mixing times over a modulus list");
  take_last(tmix_cmd->add_option("--n", tmix.n, "matrix dimension"));
  take_last(tmix_cmd->add_option("--m-list", tmix.m_list, "comma-separated moduli"));
  take_last(tmix_cmd->add_option("--eps", tmix.eps, "TV threshold"));
  take_last(tmix_cmd->add_option("--out", tmix.out, "output directory"));
  take_last(tmix_cmd->add_option("--threads", tmix.threads, "worker threads"));

  SpectralOpts spec;
  CLI::App* spectral_cmd =
      app.add_subcommand("spectral", "conditional first-row l2 bounds vs exact TV");
  take_last(spectral_cmd->add_option("--n", spec.n, "matrix dimension"));
  take_last(spectral_cmd->add_option("--m", spec.m, "modulus")->required());
  take_last(spectral_cmd->add_option("--horizon", spec.horizon, "simulation horizon"));
  take_last(spectral_cmd->add_option("--replicas", spec.replicas, "replicas"));
  take_last(spectral_cmd->add_option("--seed", spec.seed, "base seed"));
  take_last(spectral_cmd->add_option("--out", spec.out, "output directory"));
  take_last(spectral_cmd->add_option("--threads", spec.threads, "worker threads"));

  ObserveOpts obs;
  CLI::App* observe_cmd = app.add_subcommand("observe", "observable analyses over event logs");
  take_last(observe_cmd
                ->add_option("--check", obs.check,
                             "separating|backwards-identity|induction|track-z|intervals|"
                             "good-intervals|ring-counter|corner|east|column-z")
                ->required());
  take_last(observe_cmd->add_option("--log", obs.log, "event log file (.jsonl)"));
  take_last(observe_cmd->add_option("--n", obs.n, "matrix dimension (generation checks)"));
  take_last(observe_cmd->add_option("--m", obs.m, "modulus (generation checks)"));
  take_last(observe_cmd->add_option("--horizon", obs.horizon, "horizon (generation checks)"));
  take_last(observe_cmd->add_option("--replicas", obs.replicas, "replicas (generation checks)"));
  take_last(observe_cmd->add_option("--seed", obs.seed, "base seed"));
  take_last(observe_cmd->add_option("--y", obs.y, "observable vector, comma separated"));
  take_last(observe_cmd->add_option("--row", obs.row, "row index for Z traces"));
  take_last(observe_cmd->add_option("--induced-row", obs.induced_row, "I (0 = all)"));
  take_last(observe_cmd->add_option("--L", obs.L, "good-interval length"));
  take_last(observe_cmd->add_option("--g", obs.g, "good-interval fraction parameter"));
  take_last(observe_cmd->add_option("--x", obs.x_threshold, "ring-counter magnitude threshold"));
  take_last(observe_cmd->add_option("--t", obs.t, "query time (default: horizon)"));
  take_last(observe_cmd->add_option("--out", obs.out, "output directory"));
  take_last(observe_cmd->add_option("--threads", obs.threads, "worker threads"));

  ThetaOpts theta;
  CLI::App* theta_cmd = app.add_subcommand("theta", "top-k mass of a projected entry");
  take_last(theta_cmd->add_option("--n", theta.n, "matrix dimension"));
  take_last(theta_cmd->add_option("--m", theta.m, "modulus")->required());
  take_last(theta_cmd->add_option("--t", theta.t, "time"));
  take_last(theta_cmd->add_option("--replicas", theta.replicas, "replicas"));
  take_last(theta_cmd->add_option("--seed", theta.seed, "base seed"));
  take_last(theta_cmd->add_option("--entry-i", theta.entry_i, "entry row"));
  take_last(theta_cmd->add_option("--entry-j", theta.entry_j, "entry column (0 = n)"));
  take_last(theta_cmd->add_option("--k", theta.k, "subset size"));
  take_last(theta_cmd->add_option("--out", theta.out, "output directory"));
  take_last(theta_cmd->add_option("--threads", theta.threads, "worker threads"));

  BoundsOpts bounds;
  CLI::App* bounds_cmd = app.add_subcommand("bounds", "closed-form bound suites");
  take_last(bounds_cmd->add_option("--lemma", bounds.lemma, "integral|q|expon"));
  take_last(bounds_cmd->add_option("--m-min", bounds.m_min, "smallest modulus (integral)"));
  take_last(bounds_cmd->add_option("--m-max", bounds.m_max, "largest modulus (integral)"));
  take_last(bounds_cmd->add_option("--x-grid", bounds.x_grid, "x grid (integral)"));
  take_last(bounds_cmd->add_option("--n", bounds.n, "matrix dimension (q)"));
  take_last(bounds_cmd->add_option("--m", bounds.m, "modulus (q)"));
  take_last(bounds_cmd->add_option("--k-grid", bounds.k_grid, "ring-count grid (q, expon)"));
  take_last(bounds_cmd->add_option("--trials", bounds.trials, "MC trials (expon; 0 = exact only)"));
  take_last(bounds_cmd->add_option("--variant", bounds.variant, "prime|general (q)"));
  take_last(bounds_cmd->add_option("--ktilde", bounds.ktilde, "Q_I threshold constant"));
  take_last(bounds_cmd->add_option("--kconst", bounds.kconst, "W_I threshold constant (general)"));
  take_last(bounds_cmd->add_option("--beta", bounds.beta, "P2 threshold prefactor"));
  take_last(bounds_cmd->add_option("--out", bounds.out, "output directory"));
  take_last(bounds_cmd->add_option("--threads", bounds.threads, "worker threads"));

  ScalingCmdOpts scaling;
  CLI::App* scaling_cmd = app.add_subcommand("scaling", "mixing-time scaling studies");
  take_last(scaling_cmd->add_option("--points", scaling.points, "grid as 'n:m1,m2;n2:m...'"));
  take_last(scaling_cmd->add_option("--eps", scaling.eps, "TV threshold"));
  take_last(scaling_cmd->add_option("--replicas", scaling.replicas, "replicas per MC probe"));
  take_last(scaling_cmd->add_option("--budget", scaling.budget, "probe budget per point"));
  take_last(scaling_cmd->add_option("--seed", scaling.seed, "base seed"));
  take_last(scaling_cmd->add_option("--out", scaling.out, "output directory"));
  take_last(scaling_cmd->add_option("--threads", scaling.threads, "worker threads"));

  RerunOpts rerun;
  CLI::App* rerun_cmd = app.add_subcommand("rerun", "re-execute a manifest and verify digests");
  take_last(rerun_cmd->add_option("--manifest", rerun.manifest, "manifest file")->required());
  take_last(rerun_cmd->add_option("--out", rerun.out, "fresh output directory"));

  try {
    std::vector<std::string> cli_args(args.rbegin(), args.rend());  // CLI11 wants reversed
    app.parse(cli_args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(sim, args);
    if (exact_cmd->parsed()) return cmd_exact_tv(etv, args);
    if (tmix_cmd->parsed()) return cmd_tmix(tmix, args);
    if (spectral_cmd->parsed()) return cmd_spectral(spec, args);
    if (observe_cmd->parsed()) return cmd_observe(obs, args);
    if (theta_cmd->parsed()) return cmd_theta(theta, args);
    if (bounds_cmd->parsed()) return cmd_bounds(bounds, args);
    if (scaling_cmd->parsed()) return cmd_scaling(scaling, args);
    if (rerun_cmd->parsed()) return cmd_rerun(rerun);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const SizeCapError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitAssertion;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return dispatch(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
