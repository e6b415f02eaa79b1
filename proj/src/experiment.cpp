#include "orthospec/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include <json.hpp>

#include "orthospec/asymptotics.hpp"
#include "orthospec/error.hpp"
#include "orthospec/kernels.hpp"
#include "orthospec/pcaep.hpp"
#include "orthospec/spectrum.hpp"

namespace orthospec {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.precision(17);
  return out;
}

void write_resolved(const ExperimentConfig& cfg, const fs::path& dir) {
  open_out(dir / "resolved.toml") << to_config_text(cfg);
}

nlohmann::json num_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json to_json(const AsymptoticPrediction& p) {
  nlohmann::json j;
  j["delta"] = p.delta;
  j["mu_bar"] = p.mu_bar;
  j["mu_hat"] = p.mu_hat ? nlohmann::json(*p.mu_hat) : nlohmann::json(nullptr);
  j["rho_sq"] = p.rho_sq;
  j["theta_sq"] = p.theta_sq;
  j["lambda_at_mu_hat"] = num_json(p.lambda_at_mu_hat);
  j["positive_phase"] = p.positive_phase;
  j["boundary"] = p.boundary;
  if (!p.note.empty()) j["note"] = p.note;
  return j;
}

SensingSpec sensing_for(const std::string& ensemble, std::size_t n, double delta) {
  SensingSpec s;
  s.kind = parse_sensing_kind(ensemble);
  s.n = n;
  s.delta = delta;
  return s;
}

}  // namespace

void prepare_output_dir(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) {
      fail(ErrorCode::kIo, "output path '" + dir.string() + "' exists and is not a directory");
    }
    if (!fs::is_empty(dir, ec) && !force) {
      fail(ErrorCode::kIo, "output directory '" + dir.string() +
                               "' is not empty; pass --force to overwrite");
    }
  }
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create '" + dir.string() + "': " + ec.message());
}

std::vector<SweepCell> sweep_cells(const SweepConfig& cfg, std::vector<std::string>& skipped) {
  std::vector<SweepCell> cells;
  for (const auto& e : cfg.ensembles) {
    const SensingKind kind = parse_sensing_kind(e);
    if (kind == SensingKind::kHaar && cfg.n > cfg.haar_n_cap) {
      fail(ErrorCode::kConfig, "haar sweep with n=" + std::to_string(cfg.n) +
                                   " exceeds haar_n_cap=" + std::to_string(cfg.haar_n_cap));
    }
    for (const auto& f : cfg.funcs) {
      for (double d : cfg.delta_grid) {
        if (kind == SensingKind::kCdp && (d != std::floor(d) || d < 2.0)) {
          skipped.push_back(e + " " + f + " delta=" + num(d) + " (CDP needs an integer delta >= 2)");
          continue;
        }
        cells.push_back({e, f, d});
      }
    }
  }
  return cells;
}

SweepOutput run_sweep(const std::vector<SweepCell>& cells, std::size_t n, std::size_t trials,
                      std::uint64_t base_seed, const SweepConfig& limits,
                      const QuadratureSpec& q) {
  SweepOutput out;
  out.trials.resize(cells.size() * trials);
  std::vector<TrialSpec> specs;
  specs.reserve(cells.size());
  for (const auto& c : cells) {
    TrialSpec t;
    t.sensing = sensing_for(c.ensemble, n, c.delta);
    t.func = parse_func(c.func);
    t.max_iter = limits.max_iter;
    t.tol = limits.tol;
    specs.push_back(t);
  }

  const auto jobs = static_cast<std::ptrdiff_t>(out.trials.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t j = 0; j < jobs; ++j) {
    const auto cell = static_cast<std::size_t>(j) / trials;
    const auto k = static_cast<std::size_t>(j) % trials;
    TrialRow& row = out.trials[static_cast<std::size_t>(j)];
    row.ensemble = cells[cell].ensemble;
    row.func = cells[cell].func;
    row.delta_nominal = cells[cell].delta;
    row.result.seed = Seed{base_seed + k};
    try {
      row.result = run_trial(specs[cell], Seed{base_seed + k});
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }

  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepRow r;
    r.ensemble = cells[c].ensemble;
    r.func = cells[c].func;
    r.delta_nominal = cells[c].delta;
    const SensingSpec& s = specs[c].sensing;
    r.delta_realized = static_cast<double>(resolve_rows(s)) / static_cast<double>(s.n);
    r.p2_pred = predict(specs[c].func, r.delta_realized, q).rho_sq;
    std::vector<double> p2;
    for (std::size_t k = 0; k < trials; ++k) {
      const TrialRow& t = out.trials[c * trials + k];
      if (!t.error.empty()) {
        ++r.failures;
        continue;
      }
      p2.push_back(t.result.p2);
      if (t.result.converged) ++r.converged;
    }
    r.trials = p2.size();
    if (!p2.empty()) {
      double sum = 0.0;
      for (double v : p2) sum += v;
      r.p2_mean = sum / static_cast<double>(p2.size());
      double ss = 0.0;
      for (double v : p2) ss += (v - r.p2_mean) * (v - r.p2_mean);
      r.p2_std = p2.size() > 1 ? std::sqrt(ss / static_cast<double>(p2.size() - 1)) : 0.0;
    } else {
      r.p2_mean = std::numeric_limits<double>::quiet_NaN();
      r.p2_std = std::numeric_limits<double>::quiet_NaN();
    }
    out.rows.push_back(r);
  }
  auto key = [](const SweepRow& r) { return std::tie(r.ensemble, r.func, r.delta_nominal); };
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [&](const SweepRow& a, const SweepRow& b) { return key(a) < key(b); });
  return out;
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRow>& rows) {
  os << "seed,kind,delta_realized,func,p2,lambda1,iterations,converged,error\n";
  for (const auto& t : rows) {
    const TrialResult& r = t.result;
    os << r.seed.value << ',' << t.ensemble << ',';
    if (t.error.empty()) {
      os << num(r.realized_delta) << ',' << t.func << ',' << num(r.p2) << ',' << num(r.lambda1)
         << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ",\n";
    } else {
      std::string msg = t.error;
      std::replace(msg.begin(), msg.end(), '"', '\'');
      os << "," << t.func << ",,,,,\"" << msg << "\"\n";
    }
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "delta_nominal,delta_realized,func,ensemble,p2_emp_mean,p2_emp_std,p2_pred,trials,"
        "failures,converged\n";
  for (const auto& r : rows) {
    os << num(r.delta_nominal) << ',' << num(r.delta_realized) << ',' << r.func << ','
       << r.ensemble << ',' << num(r.p2_mean) << ',' << num(r.p2_std) << ',' << num(r.p2_pred)
       << ',' << r.trials << ',' << r.failures << ',' << r.converged << '\n';
  }
}

void cmd_predict(const ExperimentConfig& cfg, bool force, std::ostream& log) {
  const fs::path dir = cfg.output_dir;
  prepare_output_dir(dir, force);
  write_resolved(cfg, dir);
  const PredictConfig& p = cfg.predict;

  std::ofstream csv = open_out(dir / "predictions.csv");
  csv << "func,delta,mu_bar,mu_hat,rho_sq,theta_sq,lambda_at_mu_hat,positive_phase,boundary\n";
  std::ofstream curves = open_out(dir / "psi_curves.csv");
  curves << "func,delta,mu,psi1,psi2,psi3,lambda,F\n";
  nlohmann::json report = nlohmann::json::object();

  for (const auto& name : p.funcs) {
    const ProcessingSpec spec = parse_func(name);
    nlohmann::json entry;
    entry["predictions"] = nlohmann::json::array();
    for (double d : p.delta_grid) {
      const AsymptoticPrediction a = predict(spec, d, cfg.quadrature);
      csv << name << ',' << num(d) << ',' << num(a.mu_bar) << ','
          << (a.mu_hat ? num(*a.mu_hat) : "") << ',' << num(a.rho_sq) << ',' << num(a.theta_sq)
          << ',' << num(a.lambda_at_mu_hat) << ',' << (a.positive_phase ? 1 : 0) << ','
          << (a.boundary ? 1 : 0) << '\n';
      entry["predictions"].push_back(to_json(a));

      if (spec.kind == ProcessingKind::kAltWeak && d < 2.0) continue;
      const ProcessingFunction f(spec, d);
      for (std::size_t k = 1; k <= p.mu_points; ++k) {
        const double mu = static_cast<double>(k) / static_cast<double>(p.mu_points);
        try {
          const PsiTriple t = psi(f, mu, cfg.quadrature);
          curves << name << ',' << num(d) << ',' << num(mu) << ',' << num(t.psi1) << ','
                 << num(t.psi2) << ',' << num(t.psi3) << ','
                 << num(lambda_of_mu(f, mu, cfg.quadrature)) << ','
                 << num(f_of_mu(f, mu, cfg.quadrature)) << '\n';
        } catch (const SingularityError&) {
          // mu = 1 touches a sup that is attained at a single point
        }
      }
    }
    if (p.thresholds) {
      const ThresholdResult th = delta_threshold(spec, p.threshold_delta_max, cfg.quadrature);
      nlohmann::json t;
      t["found"] = th.found;
      t["delta"] = th.found ? nlohmann::json(th.delta) : nlohmann::json(nullptr);
      if (th.mu_diamond) t["mu_diamond"] = *th.mu_diamond;
      if (th.delta_from_crossing) t["delta_from_crossing"] = *th.delta_from_crossing;
      entry["threshold"] = t;
      log << name << ": threshold "
          << (th.found ? num(th.delta) : "not found up to " + num(p.threshold_delta_max)) << '\n';
    }
    report[name] = entry;
  }
  open_out(dir / "predictions.json") << report.dump(2) << '\n';
  log << "wrote " << (dir / "predictions.csv").string() << '\n';
}

void cmd_sweep(const ExperimentConfig& cfg, bool force, std::ostream& log) {
  const fs::path dir = cfg.output_dir;
  std::vector<std::string> skipped;
  const std::vector<SweepCell> cells = sweep_cells(cfg.sweep, skipped);
  prepare_output_dir(dir, force);
  write_resolved(cfg, dir);
  for (const auto& s : skipped) log << "skipped " << s << '\n';
  log << cells.size() << " cells x " << cfg.sweep.trials << " trials\n";

  const SweepOutput out =
      run_sweep(cells, cfg.sweep.n, cfg.sweep.trials, cfg.seed, cfg.sweep, cfg.quadrature);
  {
    std::ofstream f = open_out(dir / "trials.csv");
    write_trials_csv(f, out.trials);
  }
  {
    std::ofstream f = open_out(dir / "sweep.csv");
    write_sweep_csv(f, out.rows);
  }
  // One block per (ensemble, func), two blank lines apart, for gnuplot's `index`.
  std::ofstream dat = open_out(dir / "sweep.dat");
  std::string current;
  for (const auto& r : out.rows) {
    const std::string block = r.ensemble + " " + r.func;
    if (block != current) {
      if (!current.empty()) dat << "\n\n";
      dat << "# " << block << "\n# delta p2_mean p2_std p2_pred\n";
      current = block;
    }
    dat << num(r.delta_realized) << ' ' << num(r.p2_mean) << ' ' << num(r.p2_std) << ' '
        << num(r.p2_pred) << '\n';
  }
  std::size_t failures = 0;
  for (const auto& r : out.rows) failures += r.failures;
  log << "wrote " << (dir / "sweep.csv").string() << " (" << failures << " failed trials)\n";
}

void cmd_pcaep(const ExperimentConfig& cfg, bool force, std::ostream& log) {
  const fs::path dir = cfg.output_dir;
  const PcaepConfig& c = cfg.pcaep;
  TrackedSpec spec;
  spec.sensing = sensing_for(c.ensemble, c.n, c.delta);
  spec.func = parse_func(c.func);
  spec.mu = c.mu;
  spec.alpha0 = Complex(c.alpha0, 0.0);
  spec.sigma0 = c.sigma0;
  spec.t_max = c.t_max;
  spec.quadrature = cfg.quadrature;
  prepare_output_dir(dir, force);
  write_resolved(cfg, dir);

  std::vector<TrackedRun> runs;
  for (std::size_t k = 0; k < c.seeds; ++k) runs.push_back(run_tracked(spec, Seed{cfg.seed + k}));

  const std::string header =
      "t,alpha_emp_re,alpha_emp_im,alpha_se_re,alpha_se_im,sigma2_emp,sigma2_se,p2_emp,p2_se,"
      "wcorr_emp,wcorr_se\n";
  auto write_record = [](std::ostream& os, const TrackedRecord& r) {
    os << r.t << ',' << num(r.alpha_emp.real()) << ',' << num(r.alpha_emp.imag()) << ','
       << num(r.alpha_se.real()) << ',' << num(r.alpha_se.imag()) << ',' << num(r.sigma2_emp)
       << ',' << num(r.sigma2_se) << ',' << num(r.p2_emp) << ',' << num(r.p2_se) << ','
       << num(r.wcorr_emp) << ',' << num(r.wcorr_se) << '\n';
  };

  // Seed-averaged empirical columns; the SE columns do not depend on the seed.
  std::ofstream mean = open_out(dir / "tracked.csv");
  mean << header;
  const std::size_t len = runs.front().records.size();
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (std::size_t t = 0; t < len; ++t) {
    TrackedRecord r = runs.front().records[t];
    r.alpha_emp = 0.0;
    r.sigma2_emp = r.p2_emp = r.wcorr_emp = 0.0;
    for (const auto& run : runs) {
      const TrackedRecord& x = run.records[t];
      r.alpha_emp += x.alpha_emp * inv;
      r.sigma2_emp += x.sigma2_emp * inv;
      r.p2_emp += x.p2_emp * inv;
      r.wcorr_emp += x.wcorr_emp * inv;
    }
    write_record(mean, r);
  }
  std::ofstream per_seed = open_out(dir / "tracked_seeds.csv");
  per_seed << "seed," << header;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    for (const auto& r : runs[k].records) {
      per_seed << cfg.seed + k << ',';
      write_record(per_seed, r);
    }
  }

  const TrackedRun& r0 = runs.front();
  nlohmann::json summary;
  summary["mu"] = r0.mu;
  summary["delta_realized"] = r0.realized_delta;
  summary["psi"] = {{"psi1", r0.psi.psi1}, {"psi2", r0.psi.psi2}, {"psi3", r0.psi.psi3}};
  summary["alpha_rate"] = (r0.realized_delta - 1.0) * (r0.psi.psi1 - 1.0);
  summary["seeds"] = runs.size();
  open_out(dir / "summary.json") << summary.dump(2) << '\n';
  log << "mu=" << num(r0.mu) << ", wrote " << (dir / "tracked.csv").string() << '\n';
}

void cmd_spectrum(const ExperimentConfig& cfg, bool force, std::ostream& log) {
  const fs::path dir = cfg.output_dir;
  const SpectrumConfig& c = cfg.spectrum;
  SpectrumSpec spec;
  spec.sensing = sensing_for(c.ensemble, c.n, c.delta);
  spec.func = parse_func(c.func);
  spec.branch = parse_branch(c.branch);
  spec.cap = c.cap;
  spec.with_e = c.with_e;
  spec.quadrature = cfg.quadrature;
  prepare_output_dir(dir, force);
  write_resolved(cfg, dir);

  const SpectrumReport r = analyze(spec, Seed{cfg.seed});
  open_out(dir / "report.json") << to_json(r).dump(2) << '\n';
  if (r.status != "ok") {
    log << r.status << ": " << r.note << '\n';
    return;
  }
  std::ofstream d = open_out(dir / "d_eigs.csv");
  d << "index,value\n";
  for (Eigen::Index i = 0; i < r.d_eigs.size(); ++i) d << i << ',' << num(r.d_eigs[i]) << '\n';
  const Histogram h = freedman_diaconis(r.d_eigs);
  std::ofstream hist = open_out(dir / "d_hist.csv");
  hist << "lo,hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    hist << num(h.edges[b]) << ',' << num(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
  }
  if (c.with_e) {
    std::ofstream e = open_out(dir / "e_eigs.csv");
    e << "re,im\n";
    for (Eigen::Index i = 0; i < r.e_eigs.size(); ++i) {
      e << num(r.e_eigs[i].real()) << ',' << num(r.e_eigs[i].imag()) << '\n';
    }
  }
  log << "mu=" << num(r.mu) << " extreme eigenvalue of D " << num(r.d_extreme)
      << ", predicted " << num(r.lambda_pred) << ", outlier gap " << num(r.outlier_gap) << '\n';
}

}  // namespace orthospec
