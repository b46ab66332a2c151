#pragma once

// Command-line front end: simulate, fit, features and compare.
//
// Every subcommand accepts --config FILE with `key = value` lines, where a key is
// any long option name of that subcommand; options given on the command line win.
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/evaluation.hpp"
#include "lcm/fit.hpp"
#include "lcm/io.hpp"
#include "lcm/mcmc.hpp"
#include "lcm/simulator.hpp"
#include "lcm/volatility.hpp"

namespace lcm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumeric = 2 };

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::vector<int> parseIntList(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const auto& part : splitCsv(s)) {
    if (part.empty()) continue;
    out.push_back(static_cast<int>(parseInteger(part, 0, what)));
  }
  if (out.empty()) throw ConfigError(what + " list is empty");
  return out;
}

inline std::vector<std::string> parseNameList(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& part : splitCsv(s))
    if (!part.empty()) out.push_back(part);
  return out;
}

/// Rows in the order of the published tables: tau, fixed effects, level
/// precisions, correlations, transition coefficients, state precisions.
inline void printFitTable(const FitResult& fit, std::ostream& out) {
  auto row = [&](const ParameterSummary& s) {
    out << std::left << std::setw(28) << s.name << std::right << fmt("%14.6g", s.mean) << fmt("%14.6g", s.sd) << "\n";
  };
  out << std::left << std::setw(28) << "parameter" << std::right << std::setw(14) << "mean" << std::setw(14) << "sd" << "\n";
  auto byPrefix = [&](const std::string& prefix) {
    for (const auto& s : fit.hyper)
      if (s.name.rfind(prefix, 0) == 0) row(s);
  };
  byPrefix("tau");
  for (const auto& s : fit.fixed) row(s);
  byPrefix("level_prec_");
  byPrefix("rho_");
  byPrefix("phi_");
  byPrefix("state_prec_");
}

inline void printDiagnostics(const FitResult& fit, std::ostream& out) {
  const auto& d = fit.diagnostics;
  out << "converged: " << (d.converged ? "yes" : "no") << "\n";
  out << "optimizer evaluations: " << d.optimizerEvaluations << "\n";
  out << "newton iterations at mode: " << d.newtonIterations << "\n";
  out << "log posterior at mode: " << fmt("%.10g", d.logPosteriorAtMode) << "\n";
  out << "grid points: " << fit.grid.points.size() << (fit.grid.standardized ? " (standardized)" : " (unstandardized)") << "\n";
  for (const auto& w : d.warnings) out << "warning: " << w << "\n";
}

/// Turns the --config file of the selected subcommand into `--key=value` tokens
/// placed before the explicit arguments, so explicit arguments take precedence.
inline std::vector<std::string> expandConfig(const std::vector<std::string>& args, CLI::App& app) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  for (auto* s : app.get_subcommands({})) {
    if (s->get_name() == args[0]) sub = s;
  }
  if (!sub) return args;
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  std::vector<std::string> out{args[0]};
  if (!path.empty()) {
    for (const auto& kv : parseKeyValues(readFile(path))) {
      const CLI::Option* opt = sub->get_option_no_throw("--" + kv.key);
      if (!opt || kv.key == "config" || kv.key == "help") {
        throw ParseError("unknown key '" + kv.key + "' for '" + args[0] + "'", kv.line);
      }
      if (opt->get_type_size() == 0) {
        // flag
        if (kv.value == "true" || kv.value == "1" || kv.value == "yes") out.push_back("--" + kv.key);
        else if (!(kv.value == "false" || kv.value == "0" || kv.value == "no")) {
          throw ParseError("flag '" + kv.key + "' expects true or false", kv.line);
        }
      } else if (opt->get_expected_max() > 1) {
        for (const auto& v : parseNameList(kv.value)) out.push_back("--" + kv.key + "=" + v);
      } else {
        out.push_back("--" + kv.key + "=" + kv.value);
      }
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace detail

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string preset = "table1";
  std::uint64_t seed = 1;
  int n = 0, T = 0;  // 0 keeps the preset
  double tau = 0.0;
  std::string init = "stationary";
  std::string panelPath = "panel.csv";
  std::string truthPath = "truth.txt";
};

inline int cmdSimulate(const SimulateArgs& a, std::ostream& out) {
  if (a.preset != "table1" && a.preset != "table2") throw ConfigError("preset must be table1 or table2");
  if (a.n < 0 || a.T < 0) throw ConfigError("n and T must be positive");
  const int n = a.n ? a.n : 30, T = a.T ? a.T : 500;
  SimulationTruth truth = a.preset == "table1" ? table1Truth(n, T, a.seed) : table2Truth(n, T, a.seed);
  if (a.tau != 0.0) truth.tau = a.tau;
  if (a.init != "stationary" && a.init != "zero") throw ConfigError("init must be stationary or zero");
  truth.init = a.init == "zero" ? StateInit::Zero : StateInit::Stationary;
  const SimulatedPanel sim = simulateLcm(truth);
  writeFile(a.panelPath, formatPanelCsv(sim.data));
  writeFile(a.truthPath, formatTruth(truth, a.preset == "table1" ? "lcm-ar" : "lcm-var"));
  out << "seed " << a.seed << " n " << truth.n << " m " << truth.m << " T " << truth.T << "\n";
  out << "wrote " << a.panelPath << " and " << a.truthPath << "\n";
  return kOk;
}

// ----------------------------------------------------------------------- fit

struct FitArgs {
  std::string panelPath;
  std::string variant = "lcm-ar";
  int p = 1;
  std::string predictors;  // comma list; empty means every covariate in the panel
  bool noPredictors = false;
  std::string intercepts;  // empty: the variant's default
  std::string coefficients;
  std::string prior = "default";
  double tol = 1e-8;
  int maxIter = 50;
  std::string curvature = "observed";
  std::string optimizer = "bfgs";
  double gridStep = 0.75;
  int trainLength = 0;  // 0: every time point
  std::string outPath;
  std::string fromFit;
  std::string oracle = "none";
  std::uint64_t seed = 1;
  int mcmcIterations = 20000;
  int mcmcBurnIn = 5000;
};

inline LcmSpec specFromArgs(const FitArgs& a, const PanelData& data) {
  std::vector<std::string> preds;
  if (!a.noPredictors) preds = a.predictors.empty() ? data.covariateNames : detail::parseNameList(a.predictors);
  LcmSpec spec = LcmSpec::make(parseVariant(a.variant), a.p, preds);
  if (!a.intercepts.empty()) spec.interceptScope = parseInterceptScope(a.intercepts);
  if (!a.coefficients.empty()) {
    if (a.coefficients != "shared" && a.coefficients != "component") throw ConfigError("coefficients must be shared or component");
    spec.coefficientScope = a.coefficients == "shared" ? CoefficientScope::Shared : CoefficientScope::PerComponent;
  }
  if (a.prior == "volatility") spec.priors = PriorConfig::volatility();
  else if (a.prior != "default") throw ConfigError("prior must be default or volatility");
  for (const auto& name : spec.predictorNames) {
    if (data.covariateIndex(name) < 0) throw ConfigError("panel has no covariate '" + name + "'");
  }
  spec.validate(data.m);
  return spec;
}

inline FitOptions fitOptionsFromArgs(const FitArgs& a) {
  FitOptions o;
  o.laplace.tol = a.tol;
  o.laplace.maxIter = a.maxIter;
  if (a.curvature == "expected") o.laplace.curvature = Curvature::Expected;
  else if (a.curvature != "observed") throw ConfigError("curvature must be observed or expected");
  if (a.optimizer == "nelder-mead") o.method = HyperOptimizer::NelderMead;
  else if (a.optimizer != "bfgs") throw ConfigError("optimizer must be bfgs or nelder-mead");
  if (!(a.gridStep > 0.0)) throw ConfigError("grid step must be positive");
  o.gridStep = a.gridStep;
  return o;
}

inline int cmdFit(const FitArgs& a, std::ostream& out) {
  if (!a.fromFit.empty()) {
    const FitResult saved = parseFit(readFile(a.fromFit));
    out << "fit file " << a.fromFit << ": " << variantName(saved.spec.variant) << " n " << saved.n << " m " << saved.m
        << " T " << saved.T << "\n";
    detail::printFitTable(saved, out);
    detail::printDiagnostics(saved, out);
    if (a.panelPath.empty()) return saved.diagnostics.converged ? kOk : kNumeric;
    // Refit with the saved specification and compare the summaries.
    PanelData data = readPanelCsv(a.panelPath);
    if (data.T != saved.T) data = data.slice(0, saved.T);
    FitOptions o = fitOptionsFromArgs(a);
    const FitResult again = fitLcm<GammaFamily>(saved.spec, data, o);
    double diff = 0.0;
    for (std::size_t k = 0; k < saved.hyper.size(); ++k) diff = std::max(diff, std::abs(saved.hyper[k].mean - again.hyper[k].mean));
    for (std::size_t k = 0; k < saved.fixed.size(); ++k) diff = std::max(diff, std::abs(saved.fixed[k].mean - again.fixed[k].mean));
    const bool same = formatFit(again) == formatFit(saved);
    out << "refit: " << (same ? "identical to saved fit" : "differs from saved fit") << " (max |mean difference| "
        << detail::fmt("%.3g", diff) << ")\n";
    return same ? kOk : kNumeric;
  }
  if (a.panelPath.empty()) throw ConfigError("fit needs --panel or --from-fit");
  PanelData data = readPanelCsv(a.panelPath);
  if (a.trainLength < 0 || a.trainLength > data.T) throw ConfigError("train length must lie in [1, T]");
  if (a.trainLength > 0) data = data.slice(0, a.trainLength);
  const LcmSpec spec = specFromArgs(a, data);
  const FitOptions o = fitOptionsFromArgs(a);
  const FitResult fit = fitLcm<GammaFamily>(spec, data, o);
  out << variantName(spec.variant) << " p " << spec.p << " n " << data.n << " m " << data.m << " T " << data.T << "\n";
  detail::printFitTable(fit, out);
  detail::printDiagnostics(fit, out);
  if (!a.outPath.empty()) writeFile(a.outPath, formatFit(fit));
  if (a.oracle == "mcmc") {
    McmcOptions mo;
    mo.iterations = a.mcmcIterations;
    mo.burnIn = a.mcmcBurnIn;
    mo.seed = a.seed;
    const McmcResult mc = mcmcOracle(spec, data, mo);
    out << "\nMCMC oracle (" << mc.draws << " draws, seed " << a.seed << ")\n";
    out << std::left << std::setw(28) << "parameter" << std::right << std::setw(14) << "laplace" << std::setw(14) << "mcmc"
        << std::setw(12) << "rel.diff" << std::setw(12) << "ess" << "\n";
    auto line = [&](const ParameterSummary& s, bool relative) {
      const McmcParameter& p = mc.find(s.name);
      const double d = relative ? std::abs(s.mean - p.mean) / std::max(std::abs(p.mean), 1e-300) : std::abs(s.mean - p.mean);
      out << std::left << std::setw(28) << s.name << std::right << detail::fmt("%14.6g", s.mean) << detail::fmt("%14.6g", p.mean)
          << detail::fmt("%12.4g", d) << detail::fmt("%12.1f", p.ess) << (relative ? "" : " (abs)") << "\n";
    };
    for (const auto& s : fit.fixed) line(s, false);
    for (const auto& s : fit.hyper) line(s, true);
  } else if (a.oracle != "none") {
    throw ConfigError("oracle must be none or mcmc");
  }
  return fit.diagnostics.converged ? kOk : kNumeric;
}

// ------------------------------------------------------------------ features

struct FeaturesArgs {
  std::string ticksPath;
  std::string dailyPath;
  double interval = 300.0;
  int bandwidth = -1;
  bool takeSqrt = false;
  bool kendall = false;
  std::string outPath;
  std::string panelOut;
};

inline int cmdFeatures(const FeaturesArgs& a, std::ostream& out, std::ostream& err) {
  if (a.ticksPath.empty() == a.dailyPath.empty()) throw ConfigError("features needs exactly one of --ticks or --daily");
  std::vector<DailyMeasures> days = a.ticksPath.empty()
                                        ? parseDailyCsv(readFile(a.dailyPath))
                                        : dailyFromTicks(parseTickCsv(readFile(a.ticksPath)), a.interval, a.bandwidth, &err);
  if (a.takeSqrt) {
    std::vector<DailyMeasures> kept;
    for (const auto& d : days) {
      if (d.rk < 0.0) err << "warning: dropping " << d.symbol << " " << d.date << ": negative realized kernel\n";
      else kept.push_back(d);
    }
    days.swap(kept);
  }
  const std::string csv = formatDailyCsv(days, a.takeSqrt);
  if (a.outPath.empty()) out << csv;
  else writeFile(a.outPath, csv);
  if (!a.panelOut.empty()) writeFile(a.panelOut, formatPanelCsv(buildVolatilityPanel(days)));
  if (a.kendall) {
    std::vector<double> cols[3];
    for (const auto& d : days) {
      cols[0].push_back(d.medrv);
      cols[1].push_back(d.rk);
      cols[2].push_back(d.bpv);
    }
    const char* names[3] = {"medrv", "rk", "bpv"};
    out << "kendall";
    for (const char* nm : names) out << std::setw(10) << nm;
    out << "\n";
    for (int r = 0; r < 3; ++r) {
      out << std::left << std::setw(7) << names[r] << std::right;
      for (int c = 0; c < 3; ++c) out << detail::fmt("%10.4f", r == c ? 1.0 : kendallTau(cols[r], cols[c]));
      out << "\n";
    }
  }
  return kOk;
}

// ------------------------------------------------------------------- compare

struct CompareArgs {
  std::vector<std::string> fits;  // path or name=path
  std::string panelPath;
  int holdoutStart = 0;  // 0: the fits' training length
  std::string horizons = "1,5,10";
  bool rolling = false;
  std::string outPath;
};

inline int cmdCompare(const CompareArgs& a, std::ostream& out) {
  if (a.fits.empty()) throw ConfigError("compare needs at least one --fit");
  if (a.panelPath.empty()) throw ConfigError("compare needs --panel");
  const PanelData data = readPanelCsv(a.panelPath);
  std::vector<NamedFit> fits;
  for (const auto& item : a.fits) {
    const auto eq = item.find('=');
    const std::string path = eq == std::string::npos ? item : item.substr(eq + 1);
    FitResult f = parseFit(readFile(path));
    const std::string name = eq == std::string::npos ? variantName(f.spec.variant) : item.substr(0, eq);
    for (const auto& other : fits)
      if (other.name == name) throw ConfigError("duplicate model name '" + name + "'; use name=path");
    fits.push_back({name, std::move(f)});
  }
  const int holdout = a.holdoutStart > 0 ? a.holdoutStart : fits.front().fit.T;
  CompareOptions opt;
  opt.horizons = detail::parseIntList(a.horizons, "horizon");
  opt.rolling = a.rolling;
  const auto rows = compareModels(fits, data, holdout, opt);
  std::string csv = "model,horizon,mape,mae,best\n";
  for (const auto& r : rows) {
    csv += r.model + "," + std::to_string(r.horizon) + "," + formatDouble(r.mape) + "," + formatDouble(r.mae) + "," + r.best + "\n";
  }
  if (a.outPath.empty()) out << csv;
  else writeFile(a.outPath, csv);
  out << "ranking by MAPE (holdout from t = " << holdout + 1 << (a.rolling ? ", rolling origins" : "") << ")\n";
  for (int h : opt.horizons) {
    std::vector<const ComparisonRow*> sel;
    for (const auto& r : rows)
      if (r.horizon == h) sel.push_back(&r);
    std::stable_sort(sel.begin(), sel.end(), [](const ComparisonRow* x, const ComparisonRow* y) { return x->mape < y->mape; });
    out << "h=" << h << ":";
    for (std::size_t k = 0; k < sel.size(); ++k) {
      out << " " << k + 1 << ". " << sel[k]->model << " (" << detail::fmt("%.4f", sel[k]->mape) << ")";
    }
    out << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------- main

inline int run(const std::vector<std::string>& rawArgs, std::ostream& out, std::ostream& err) {
  CLI::App app{"Level correlated models for positive multivariate time series", "lcm"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "simulate a panel from a preset truth");
  sim->add_option("--preset", sa.preset, "table1 (LCM-AR) or table2 (LCM-VAR)");
  sim->add_option("--seed", sa.seed, "random seed");
  sim->add_option("--n", sa.n, "number of subjects (preset: 30)");
  sim->add_option("--T", sa.T, "number of time points (preset: 500)");
  sim->add_option("--tau", sa.tau, "gamma shape (preset value if omitted)");
  sim->add_option("--init", sa.init, "state initialization: stationary or zero");
  sim->add_option("--panel-out", sa.panelPath, "panel CSV path");
  sim->add_option("--truth-out", sa.truthPath, "truth file path");
  sim->add_option("--config", "key = value file")->expected(1);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "fit an LCM by Laplace approximation");
  fit->add_option("--panel", fa.panelPath, "panel CSV");
  fit->add_option("--variant", fa.variant, "lcm-ar, lcm-var, lcm1-ar, lcm1-var, lcm2-ar or lcm2-var");
  fit->add_option("--p", fa.p, "lag order");
  fit->add_option("--predictors", fa.predictors, "comma-separated covariates (default: all)");
  fit->add_flag("--no-predictors", fa.noPredictors, "fit without covariates");
  fit->add_option("--intercepts", fa.intercepts, "none, component or subject-component");
  fit->add_option("--coefficients", fa.coefficients, "shared or component");
  fit->add_option("--prior", fa.prior, "default or volatility");
  fit->add_option("--tol", fa.tol, "Newton gradient tolerance");
  fit->add_option("--max-iter", fa.maxIter, "Newton iteration limit");
  fit->add_option("--curvature", fa.curvature, "observed or expected");
  fit->add_option("--optimizer", fa.optimizer, "bfgs or nelder-mead");
  fit->add_option("--grid-step", fa.gridStep, "grid step in standardized units");
  fit->add_option("--train-length", fa.trainLength, "fit on the first N time points");
  fit->add_option("--out", fa.outPath, "fit file to write");
  fit->add_option("--from-fit", fa.fromFit, "print a saved fit; with --panel, refit and compare");
  fit->add_option("--oracle", fa.oracle, "none or mcmc");
  fit->add_option("--seed", fa.seed, "MCMC seed");
  fit->add_option("--mcmc-iterations", fa.mcmcIterations, "retained MCMC sweeps");
  fit->add_option("--mcmc-burn-in", fa.mcmcBurnIn, "MCMC burn-in sweeps");
  fit->add_option("--config", "key = value file")->expected(1);

  FeaturesArgs xa;
  auto* feat = app.add_subcommand("features", "daily realized measures from ticks");
  feat->add_option("--ticks", xa.ticksPath, "tick CSV: symbol,timestamp,price");
  feat->add_option("--daily", xa.dailyPath, "precomputed daily CSV");
  feat->add_option("--interval", xa.interval, "sampling interval in seconds");
  feat->add_option("--bandwidth", xa.bandwidth, "realized kernel bandwidth H (-1: ceil(sqrt(M)))");
  feat->add_flag("--sqrt", xa.takeSqrt, "write standard-deviation versions");
  feat->add_flag("--kendall", xa.kendall, "print the Kendall matrix of medrv, rk, bpv");
  feat->add_option("--out", xa.outPath, "daily CSV path (default: stdout)");
  feat->add_option("--panel-out", xa.panelOut, "also write the model panel");
  feat->add_option("--config", "key = value file")->expected(1);

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "forecast from fits and score MAPE / MAE");
  cmp->add_option("--fit", ca.fits, "fit file, or name=path; repeatable")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  cmp->add_option("--panel", ca.panelPath, "full panel CSV (training plus holdout)");
  cmp->add_option("--holdout-start", ca.holdoutStart, "number of training time points (default: from the fit)");
  cmp->add_option("--horizons", ca.horizons, "comma-separated horizons");
  cmp->add_flag("--rolling", ca.rolling, "average over rolling origins");
  cmp->add_option("--out", ca.outPath, "comparison CSV path (default: stdout)");
  cmp->add_option("--config", "key = value file")->expected(1);

  try {
    std::vector<std::string> args = detail::expandConfig(rawArgs, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (sim->parsed()) return cmdSimulate(sa, out);
    if (fit->parsed()) return cmdFit(fa, out);
    if (feat->parsed()) return cmdFeatures(xa, out, err);
    if (cmp->parsed()) return cmdCompare(ca, out);
  } catch (const NonConvergenceError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const NotPositiveDefiniteError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const StationarityError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace lcm::cli
