#pragma once

// Text formats: panel CSV, truth and fit files (flat `key = value`), daily
// realized-measure CSV, tick CSV ingestion and the volatility panel builder.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lcm/errors.hpp"
#include "lcm/fit.hpp"
#include "lcm/model.hpp"
#include "lcm/simulator.hpp"
#include "lcm/volatility.hpp"

namespace lcm {

inline constexpr const char* kTruthFormat = "lcm-truth/1";
inline constexpr const char* kFitFormat = "lcm-fit/1";

// ---------------------------------------------------------------- primitives

/// Shortest round-trip representation is not needed; %.17g is exact and stable.
inline std::string formatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::vector<std::string> splitWords(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline double parseDouble(const std::string& s, int line, const std::string& what) {
  if (s.empty()) throw ParseError("empty " + what, line);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("invalid " + what + " '" + s + "'", line);
  }
  if (used != s.size()) throw ParseError("invalid " + what + " '" + s + "'", line);
  return v;
}

inline long long parseInteger(const std::string& s, int line, const std::string& what) {
  if (s.empty()) throw ParseError("empty " + what, line);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ParseError("invalid " + what + " '" + s + "'", line);
  }
  if (used != s.size()) throw ParseError("invalid " + what + " '" + s + "'", line);
  return v;
}

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void writeFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline std::vector<std::string> splitLines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

// ------------------------------------------------------------ key = value

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
inline std::vector<KeyValue> parseKeyValues(const std::string& text) {
  std::vector<KeyValue> out;
  const auto lines = splitLines(text);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const int lineNo = static_cast<int>(k + 1);
    std::string s = lines[k];
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineNo);
    KeyValue kv{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), lineNo};
    if (kv.key.empty()) throw ParseError("missing key", lineNo);
    out.push_back(std::move(kv));
  }
  return out;
}

/// Single-valued view of a key-value list; duplicate keys are an error.
class KeyValueMap {
 public:
  explicit KeyValueMap(std::vector<KeyValue> entries) {
    for (auto& e : entries) {
      if (map_.count(e.key)) throw ParseError("duplicate key '" + e.key + "'", e.line);
      map_.emplace(e.key, e);
    }
  }
  bool has(const std::string& key) const { return map_.count(key) > 0; }
  const KeyValue& entry(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
  }
  const std::string& str(const std::string& key) const { return entry(key).value; }
  double num(const std::string& key) const { return parseDouble(entry(key).value, entry(key).line, key); }
  long long integer(const std::string& key) const { return parseInteger(entry(key).value, entry(key).line, key); }
  std::vector<double> nums(const std::string& key) const {
    std::vector<double> out;
    for (const auto& w : splitWords(str(key))) out.push_back(parseDouble(w, entry(key).line, key));
    return out;
  }
  const std::map<std::string, KeyValue>& all() const { return map_; }

 private:
  std::map<std::string, KeyValue> map_;
};

inline std::string joinNumbers(const Vector& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) out += (k ? " " : "") + formatDouble(v(k));
  return out;
}

inline std::string joinRowMajor(const Matrix& a) {
  std::string out;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out += ((r || c) ? " " : "") + formatDouble(a(r, c));
  return out;
}

inline Vector toVector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = v[k];
  return out;
}

inline Matrix toRowMajor(const std::vector<double>& v, int rows, int cols, const std::string& what) {
  if (static_cast<int>(v.size()) != rows * cols) throw DimensionError(what + " needs " + std::to_string(rows * cols) + " values");
  Matrix a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r, c) = v[static_cast<std::size_t>(r * cols + c)];
  return a;
}

inline void requireLabel(const std::string& s, int line, const std::string& what) {
  if (s.empty()) throw ParseError("empty " + what, line);
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      throw ParseError(what + " '" + s + "' contains whitespace or a comma", line);
    }
  }
}

// ------------------------------------------------------------- panel CSV

inline std::string formatPanelCsv(const PanelData& d) {
  d.validate();
  std::string out = "subject,component,t,value";
  for (const auto& c : d.covariateNames) out += "," + c;
  out += "\n";
  for (int i = 0; i < d.n; ++i)
    for (int j = 0; j < d.m; ++j)
      for (int t = 0; t < d.T; ++t) {
        const std::size_t o = d.index(i, j, t);
        out += d.subjects[i] + "," + d.components[j] + "," + std::to_string(t + 1) + "," + formatDouble(d.y[o]);
        for (const auto& cov : d.covariates) out += "," + formatDouble(cov[o]);
        out += "\n";
      }
  return out;
}

/// Long-format panel; subjects and components keep their order of first
/// appearance; every (subject, component, t) cell for t = 1..T must be present once.
inline PanelData parsePanelCsv(const std::string& text) {
  const auto lines = splitLines(text);
  if (lines.empty()) throw ParseError("empty panel file", 1);
  const auto header = splitCsv(lines[0]);
  if (header.size() < 4 || header[0] != "subject" || header[1] != "component" || header[2] != "t" ||
      header[3] != "value") {
    throw ParseError("panel header must start with subject,component,t,value", 1);
  }
  std::vector<std::string> covNames(header.begin() + 4, header.end());
  for (const auto& c : covNames) requireLabel(c, 1, "covariate name");
  std::vector<std::string> subjects, components;
  std::map<std::string, int> subjectIndex, componentIndex;
  struct Row {
    int i, j;
    long long t;
    double y;
    std::vector<double> cov;
    int line;
  };
  std::vector<Row> rows;
  long long maxT = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const int lineNo = static_cast<int>(k + 1);
    if (trim(lines[k]).empty()) continue;
    const auto f = splitCsv(lines[k]);
    if (f.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()), lineNo);
    }
    requireLabel(f[0], lineNo, "subject");
    requireLabel(f[1], lineNo, "component");
    if (!subjectIndex.count(f[0])) {
      subjectIndex[f[0]] = static_cast<int>(subjects.size());
      subjects.push_back(f[0]);
    }
    if (!componentIndex.count(f[1])) {
      componentIndex[f[1]] = static_cast<int>(components.size());
      components.push_back(f[1]);
    }
    Row r{subjectIndex[f[0]], componentIndex[f[1]], parseInteger(f[2], lineNo, "time index"),
          parseDouble(f[3], lineNo, "value"), {}, lineNo};
    if (r.t < 1) throw ParseError("time index must start at 1", lineNo);
    if (!(r.y > 0.0) || !std::isfinite(r.y)) throw ParseError("value must be finite and positive", lineNo);
    for (std::size_t c = 4; c < f.size(); ++c) r.cov.push_back(parseDouble(f[c], lineNo, "covariate '" + header[c] + "'"));
    maxT = std::max(maxT, r.t);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("panel has no data rows", static_cast<int>(lines.size()));
  const int n = static_cast<int>(subjects.size()), m = static_cast<int>(components.size());
  const long long expected = static_cast<long long>(n) * m * maxT;
  if (static_cast<long long>(rows.size()) != expected || maxT > 10000000) {
    throw ParseError("panel is not a complete subject x component x t grid (" + std::to_string(rows.size()) +
                         " rows, expected " + std::to_string(expected) + ")",
                     static_cast<int>(lines.size()));
  }
  PanelData d = PanelData::zeros(n, m, static_cast<int>(maxT));
  d.subjects = subjects;
  d.components = components;
  std::vector<char> seen(d.size(), 0);
  std::vector<std::vector<double>> cov(covNames.size(), std::vector<double>(d.size(), 0.0));
  for (const auto& r : rows) {
    const std::size_t o = d.index(r.i, r.j, static_cast<int>(r.t - 1));
    if (seen[o]) throw ParseError("duplicate row for " + subjects[r.i] + "," + components[r.j] + "," + std::to_string(r.t), r.line);
    seen[o] = 1;
    d.y[o] = r.y;
    for (std::size_t c = 0; c < covNames.size(); ++c) cov[c][o] = r.cov[c];
  }
  for (std::size_t c = 0; c < covNames.size(); ++c) d.addCovariate(covNames[c], std::move(cov[c]));
  d.validate();
  return d;
}

inline PanelData readPanelCsv(const std::string& path) { return parsePanelCsv(readFile(path)); }

// ------------------------------------------------------------ truth file

inline std::string formatTruth(const SimulationTruth& t, const std::string& variant) {
  std::ostringstream out;
  out << "format = " << kTruthFormat << "\n";
  out << "variant = " << variant << "\n";
  out << "n = " << t.n << "\nm = " << t.m << "\nT = " << t.T << "\nseed = " << t.seed << "\n";
  out << "init = " << (t.init == StateInit::Stationary ? "stationary" : "zero") << "\n";
  out << "tau = " << formatDouble(t.tau) << "\n";
  out << "beta = " << formatDouble(t.beta) << "\n";
  out << "p = " << t.phis.size() << "\n";
  for (std::size_t h = 0; h < t.phis.size(); ++h) out << "phi_lag" << h + 1 << " = " << joinRowMajor(t.phis[h]) << "\n";
  out << "state_variances = " << joinNumbers(t.stateVariances) << "\n";
  out << "sigma = " << joinRowMajor(t.sigma) << "\n";
  return out.str();
}

inline SimulationTruth parseTruth(const std::string& text, std::string* variant = nullptr) {
  const KeyValueMap kv(parseKeyValues(text));
  if (kv.str("format") != kTruthFormat) throw ConfigError("not an " + std::string(kTruthFormat) + " file");
  SimulationTruth t;
  t.n = static_cast<int>(kv.integer("n"));
  t.m = static_cast<int>(kv.integer("m"));
  t.T = static_cast<int>(kv.integer("T"));
  t.seed = static_cast<std::uint64_t>(kv.integer("seed"));
  const std::string init = kv.str("init");
  if (init != "stationary" && init != "zero") throw ConfigError("init must be 'stationary' or 'zero'");
  t.init = init == "stationary" ? StateInit::Stationary : StateInit::Zero;
  t.tau = kv.num("tau");
  t.beta = kv.num("beta");
  const int p = static_cast<int>(kv.integer("p"));
  for (int h = 1; h <= p; ++h) t.phis.push_back(toRowMajor(kv.nums("phi_lag" + std::to_string(h)), t.m, t.m, "phi"));
  t.stateVariances = toVector(kv.nums("state_variances"));
  t.sigma = toRowMajor(kv.nums("sigma"), t.m, t.m, "sigma");
  if (variant) *variant = kv.str("variant");
  t.validate();
  return t;
}

// -------------------------------------------------------------- fit file

inline std::string formatFit(const FitResult& f) {
  std::ostringstream out;
  const PriorConfig& pr = f.spec.priors;
  out << "format = " << kFitFormat << "\n";
  out << "variant = " << variantName(f.spec.variant) << "\n";
  out << "p = " << f.spec.p << "\n";
  out << "intercepts = " << interceptScopeName(f.spec.interceptScope) << "\n";
  out << "coefficients = " << (f.spec.coefficientScope == CoefficientScope::Shared ? "shared" : "component") << "\n";
  out << "predictors =";
  for (const auto& s : f.spec.predictorNames) out << " " << s;
  out << "\n";
  out << "prior = " << joinNumbers((Vector(9) << pr.tauShape, pr.tauRate, pr.wishartDf, pr.fixedEffectPrecision,
                                    pr.varCoeffMean, pr.varCoeffVariance, pr.statePrecisionShape,
                                    pr.statePrecisionRate, pr.kappa).finished())
      << "\n";
  out << "n = " << f.n << "\nm = " << f.m << "\nT = " << f.T << "\n";
  out << "subjects =";
  for (const auto& s : f.subjects) out << " " << s;
  out << "\ncomponents =";
  for (const auto& s : f.components) out << " " << s;
  out << "\n";
  const FitDiagnostics& dg = f.diagnostics;
  out << "converged = " << (dg.converged ? 1 : 0) << "\n";
  out << "optimizer_converged = " << (dg.optimizerConverged ? 1 : 0) << "\n";
  out << "optimizer_evaluations = " << dg.optimizerEvaluations << "\n";
  out << "newton_iterations = " << dg.newtonIterations << "\n";
  out << "gradient_norm = " << formatDouble(dg.gradientNorm) << "\n";
  out << "log_posterior_at_mode = " << formatDouble(dg.logPosteriorAtMode) << "\n";
  for (const auto& w : dg.warnings) out << "warning = " << w << "\n";
  out << "grid_mode = " << joinNumbers(f.grid.mode) << "\n";
  out << "grid_standardized = " << (f.grid.standardized ? 1 : 0) << "\n";
  if (f.grid.negHessian.size() > 0) out << "grid_neg_hessian = " << joinRowMajor(f.grid.negHessian) << "\n";
  for (const auto& p : f.grid.points) {
    out << "grid_point = " << formatDouble(p.logPosterior) << " " << formatDouble(p.weight) << " " << joinNumbers(p.theta) << "\n";
  }
  for (const auto& s : f.hyper) out << "hyper = " << s.name << " " << formatDouble(s.mean) << " " << formatDouble(s.sd) << "\n";
  for (const auto& s : f.fixed) out << "fixed = " << s.name << " " << formatDouble(s.mean) << " " << formatDouble(s.sd) << "\n";
  out << "state_mean = " << joinNumbers(f.stateMean) << "\n";
  out << "state_sd = " << joinNumbers(f.stateSd) << "\n";
  return out.str();
}

inline FitResult parseFit(const std::string& text) {
  const auto entries = parseKeyValues(text);
  std::vector<KeyValue> single;
  std::vector<KeyValue> points, hyper, fixed, warnings;
  for (const auto& e : entries) {
    if (e.key == "grid_point") points.push_back(e);
    else if (e.key == "hyper") hyper.push_back(e);
    else if (e.key == "fixed") fixed.push_back(e);
    else if (e.key == "warning") warnings.push_back(e);
    else single.push_back(e);
  }
  const KeyValueMap kv(single);
  if (!kv.has("format") || kv.str("format") != kFitFormat) throw ConfigError("not an " + std::string(kFitFormat) + " file");
  FitResult f;
  f.spec = LcmSpec::make(parseVariant(kv.str("variant")), static_cast<int>(kv.integer("p")), splitWords(kv.str("predictors")));
  f.spec.interceptScope = parseInterceptScope(kv.str("intercepts"));
  const std::string coef = kv.str("coefficients");
  if (coef != "shared" && coef != "component") throw ParseError("coefficients must be 'shared' or 'component'", kv.entry("coefficients").line);
  f.spec.coefficientScope = coef == "shared" ? CoefficientScope::Shared : CoefficientScope::PerComponent;
  const auto pr = kv.nums("prior");
  if (pr.size() != 9) throw ParseError("prior needs 9 values", kv.entry("prior").line);
  f.spec.priors = {pr[0], pr[1], pr[2], pr[3], pr[4], pr[5], pr[6], pr[7], pr[8]};
  f.n = static_cast<int>(kv.integer("n"));
  f.m = static_cast<int>(kv.integer("m"));
  f.T = static_cast<int>(kv.integer("T"));
  f.spec.validate(f.m);
  f.subjects = splitWords(kv.str("subjects"));
  f.components = splitWords(kv.str("components"));
  if (static_cast<int>(f.subjects.size()) != f.n || static_cast<int>(f.components.size()) != f.m) {
    throw ConfigError("fit file labels do not match its dimensions");
  }
  FitDiagnostics& dg = f.diagnostics;
  dg.converged = kv.integer("converged") != 0;
  dg.optimizerConverged = kv.integer("optimizer_converged") != 0;
  dg.optimizerEvaluations = static_cast<int>(kv.integer("optimizer_evaluations"));
  dg.newtonIterations = static_cast<int>(kv.integer("newton_iterations"));
  dg.gradientNorm = kv.num("gradient_norm");
  dg.logPosteriorAtMode = kv.num("log_posterior_at_mode");
  for (const auto& w : warnings) dg.warnings.push_back(w.value);
  const int d = f.spec.numHyper(f.m);
  f.grid.mode = toVector(kv.nums("grid_mode"));
  if (f.grid.mode.size() != d) throw ConfigError("grid_mode has the wrong length");
  f.grid.standardized = kv.integer("grid_standardized") != 0;
  if (kv.has("grid_neg_hessian")) f.grid.negHessian = toRowMajor(kv.nums("grid_neg_hessian"), d, d, "grid_neg_hessian");
  for (const auto& e : points) {
    const auto w = splitWords(e.value);
    if (static_cast<int>(w.size()) != d + 2) throw ParseError("grid_point needs " + std::to_string(d + 2) + " values", e.line);
    GridPoint p;
    p.logPosterior = parseDouble(w[0], e.line, "log posterior");
    p.weight = parseDouble(w[1], e.line, "weight");
    p.theta.resize(d);
    for (int k = 0; k < d; ++k) p.theta(k) = parseDouble(w[static_cast<std::size_t>(k + 2)], e.line, "theta");
    f.grid.points.push_back(std::move(p));
  }
  auto summary = [](const KeyValue& e) {
    const auto w = splitWords(e.value);
    if (w.size() != 3) throw ParseError("summary needs name, mean and sd", e.line);
    return ParameterSummary{w[0], parseDouble(w[1], e.line, "mean"), parseDouble(w[2], e.line, "sd")};
  };
  for (const auto& e : hyper) f.hyper.push_back(summary(e));
  for (const auto& e : fixed) f.fixed.push_back(summary(e));
  if (static_cast<int>(f.hyper.size()) != d) throw ConfigError("fit file has the wrong number of hyperparameters");
  const LatentLayout layout(f.spec, f.n, f.m, f.T);
  if (static_cast<int>(f.fixed.size()) != layout.fixedDim()) throw ConfigError("fit file has the wrong number of fixed effects");
  f.stateMean = toVector(kv.nums("state_mean"));
  f.stateSd = toVector(kv.nums("state_sd"));
  if (f.stateMean.size() != 0 && f.stateMean.size() != layout.stateDim) throw ConfigError("state_mean has the wrong length");
  if (f.stateSd.size() != f.stateMean.size()) throw ConfigError("state_sd has the wrong length");
  return f;
}

// ---------------------------------------------------------- daily measures

inline const char* kDailyHeader = "symbol,date,medrv,rk,bpv,rv,jump,cont";

/// `takeSqrt` writes the standard-deviation versions of every measure.
inline std::string formatDailyCsv(const std::vector<DailyMeasures>& days, bool takeSqrt = false) {
  std::string out = std::string(kDailyHeader) + "\n";
  for (const auto& d : days) {
    auto v = [&](double x) { return formatDouble(takeSqrt ? std::sqrt(x) : x); };
    out += d.symbol + "," + d.date + "," + v(d.medrv) + "," + v(d.rk) + "," + v(d.bpv) + "," + v(d.rv) + "," +
           v(d.jump) + "," + v(d.cont) + "\n";
  }
  return out;
}

inline bool isDailyHeader(const std::string& line) { return trim(line) == kDailyHeader; }

inline std::vector<DailyMeasures> parseDailyCsv(const std::string& text) {
  const auto lines = splitLines(text);
  if (lines.empty() || !isDailyHeader(lines[0])) throw ParseError(std::string("daily header must be ") + kDailyHeader, 1);
  std::vector<DailyMeasures> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const int lineNo = static_cast<int>(k + 1);
    if (trim(lines[k]).empty()) continue;
    const auto f = splitCsv(lines[k]);
    if (f.size() != 8) throw ParseError("expected 8 fields, found " + std::to_string(f.size()), lineNo);
    requireLabel(f[0], lineNo, "symbol");
    requireLabel(f[1], lineNo, "date");
    DailyMeasures d;
    d.symbol = f[0];
    d.date = f[1];
    double* dst[] = {&d.medrv, &d.rk, &d.bpv, &d.rv, &d.jump, &d.cont};
    const char* names[] = {"medrv", "rk", "bpv", "rv", "jump", "cont"};
    for (int c = 0; c < 6; ++c) *dst[c] = parseDouble(f[static_cast<std::size_t>(c + 2)], lineNo, names[c]);
    d.negativeKernel = d.rk < 0.0;
    out.push_back(std::move(d));
  }
  return out;
}

// ------------------------------------------------------------------- ticks

struct Tick {
  std::string symbol;
  std::string date;      ///< YYYY-MM-DD
  double secondOfDay = 0.0;
  double price = 0.0;
  int line = 0;
};

/// YYYY-MM-DDTHH:MM:SS[.fff][Z]; a space may replace the T.
inline Tick parseTimestamp(const std::string& ts, int line) {
  auto bad = [&]() { return ParseError("invalid ISO-8601 timestamp '" + ts + "'", line); };
  if (ts.size() < 19 || ts[4] != '-' || ts[7] != '-' || (ts[10] != 'T' && ts[10] != ' ') || ts[13] != ':' ||
      ts[16] != ':') {
    throw bad();
  }
  auto digits = [&](std::size_t a, std::size_t len) {
    int v = 0;
    for (std::size_t k = a; k < a + len; ++k) {
      if (!std::isdigit(static_cast<unsigned char>(ts[k]))) throw bad();
      v = v * 10 + (ts[k] - '0');
    }
    return v;
  };
  const int month = digits(5, 2), day = digits(8, 2), hh = digits(11, 2), mm = digits(14, 2), ss = digits(17, 2);
  digits(0, 4);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60) throw bad();
  double frac = 0.0;
  std::size_t k = 19;
  if (k < ts.size() && ts[k] == '.') {
    double scale = 0.1;
    ++k;
    if (k >= ts.size() || !std::isdigit(static_cast<unsigned char>(ts[k]))) throw bad();
    while (k < ts.size() && std::isdigit(static_cast<unsigned char>(ts[k]))) {
      frac += (ts[k] - '0') * scale;
      scale /= 10.0;
      ++k;
    }
  }
  if (k < ts.size() && ts[k] == 'Z') ++k;
  if (k != ts.size()) throw bad();
  Tick t;
  t.date = ts.substr(0, 10);
  t.secondOfDay = hh * 3600.0 + mm * 60.0 + ss + frac;
  t.line = line;
  return t;
}

inline std::vector<Tick> parseTickCsv(const std::string& text) {
  const auto lines = splitLines(text);
  if (lines.empty() || trim(lines[0]) != "symbol,timestamp,price") {
    throw ParseError("tick header must be symbol,timestamp,price", 1);
  }
  std::vector<Tick> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const int lineNo = static_cast<int>(k + 1);
    if (trim(lines[k]).empty()) continue;
    const auto f = splitCsv(lines[k]);
    if (f.size() != 3) throw ParseError("expected 3 fields, found " + std::to_string(f.size()), lineNo);
    requireLabel(f[0], lineNo, "symbol");
    Tick t = parseTimestamp(f[1], lineNo);
    t.symbol = f[0];
    t.price = parseDouble(f[2], lineNo, "price");
    if (!(t.price > 0.0) || !std::isfinite(t.price)) throw ParseError("price must be finite and positive", lineNo);
    out.push_back(std::move(t));
  }
  return out;
}

/// Last-tick prices on the grid of multiples of `interval` seconds from midnight
/// that fall within the day's first and last tick.
inline std::vector<double> lastTickGrid(const std::vector<Tick>& dayTicks, double interval) {
  std::vector<double> out;
  if (dayTicks.empty()) return out;
  const double first = dayTicks.front().secondOfDay, last = dayTicks.back().secondOfDay;
  std::size_t k = 0;
  for (double g = std::ceil(first / interval) * interval; g <= last; g += interval) {
    while (k + 1 < dayTicks.size() && dayTicks[k + 1].secondOfDay <= g) ++k;
    out.push_back(dayTicks[k].price);
  }
  return out;
}

/// Daily measures per (symbol, date), ordered by symbol then date. Days with fewer
/// than three grid returns are skipped with a message on `warn`.
inline std::vector<DailyMeasures> dailyFromTicks(std::vector<Tick> ticks, double interval = 300.0, int H = -1,
                                                 std::ostream* warn = &std::cerr) {
  if (!(interval > 0.0)) throw ConfigError("sampling interval must be positive");
  std::stable_sort(ticks.begin(), ticks.end(), [](const Tick& a, const Tick& b) {
    if (a.symbol != b.symbol) return a.symbol < b.symbol;
    if (a.date != b.date) return a.date < b.date;
    return a.secondOfDay < b.secondOfDay;
  });
  std::vector<DailyMeasures> out;
  std::size_t a = 0;
  while (a < ticks.size()) {
    std::size_t b = a;
    while (b < ticks.size() && ticks[b].symbol == ticks[a].symbol && ticks[b].date == ticks[a].date) ++b;
    const std::vector<Tick> day(ticks.begin() + static_cast<std::ptrdiff_t>(a), ticks.begin() + static_cast<std::ptrdiff_t>(b));
    const auto prices = lastTickGrid(day, interval);
    if (prices.size() < 4) {
      if (warn) *warn << "warning: skipping " << day.front().symbol << " " << day.front().date << ": fewer than 3 returns\n";
    } else {
      const auto r = intradayReturns(prices);
      const int bw = H < 0 ? -1 : std::min<int>(H, static_cast<int>(r.size()) - 1);
      out.push_back(computeDailyMeasures(r, day.front().symbol, day.front().date, bw));
    }
    a = b;
  }
  return out;
}

// ---------------------------------------------------------- panel builder

/// Model panel from daily measures: subjects are symbols, components are the
/// standard-deviation versions of MedRV, RK and BPV on the dates every symbol has.
/// Covariates (all from the previous day): logLagY, the log of the own lagged
/// response, and logOnePlusJump / logOnePlusContinuous, shared by the components.
/// The first common date only supplies lags.
inline PanelData buildVolatilityPanel(const std::vector<DailyMeasures>& days) {
  std::map<std::string, std::map<std::string, const DailyMeasures*>> bySymbol;
  for (const auto& d : days) {
    auto& slot = bySymbol[d.symbol][d.date];
    if (slot) throw DimensionError("duplicate daily row for " + d.symbol + " " + d.date);
    slot = &d;
  }
  if (bySymbol.empty()) throw DimensionError("no daily measures");
  std::set<std::string> common;
  for (const auto& [date, ptr] : bySymbol.begin()->second) common.insert(date);
  for (const auto& [sym, dates] : bySymbol) {
    std::set<std::string> keep;
    for (const auto& date : common)
      if (dates.count(date)) keep.insert(date);
    common.swap(keep);
  }
  const std::vector<std::string> dates(common.begin(), common.end());
  if (dates.size() < 3) throw DimensionError("need at least three common dates across symbols");
  const int n = static_cast<int>(bySymbol.size()), m = 3, T = static_cast<int>(dates.size()) - 1;
  PanelData d = PanelData::zeros(n, m, T);
  d.components = {"medrv", "rk", "bpv"};
  d.subjects.clear();
  std::vector<double> lagY(d.size()), jump(d.size()), cont(d.size());
  int i = 0;
  for (const auto& [sym, byDate] : bySymbol) {
    d.subjects.push_back(sym);
    for (int t = 0; t <= T; ++t) {
      const DailyMeasures& day = *byDate.at(dates[static_cast<std::size_t>(t)]);
      const double vals[3] = {day.medrv, day.rk, day.bpv};
      for (int j = 0; j < m; ++j) {
        if (!(vals[j] > 0.0)) {
          throw DomainError("non-positive " + d.components[j] + " for " + sym + " " + day.date);
        }
      }
      if (t < T) {
        // previous-day covariates for time t + 1
        for (int j = 0; j < m; ++j) {
          const std::size_t o = d.index(i, j, t);
          lagY[o] = 0.5 * std::log(vals[j]);
          jump[o] = std::log1p(day.jump);
          cont[o] = std::log1p(day.cont);
        }
      }
      if (t > 0) {
        for (int j = 0; j < m; ++j) d.value(i, j, t - 1) = std::sqrt(vals[j]);
      }
    }
    ++i;
  }
  d.addCovariate("logLagY", std::move(lagY));
  d.addCovariate("logOnePlusJump", std::move(jump));
  d.addCovariate("logOnePlusContinuous", std::move(cont));
  d.validate();
  return d;
}

}  // namespace lcm
