#include <gtest/gtest.h>

#include <sstream>

#include "lcm/fit.hpp"
#include "lcm/io.hpp"
#include "lcm/simulator.hpp"

using namespace lcm;

namespace {

int parseErrorLine(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(Format, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789}) {
    EXPECT_EQ(parseDouble(formatDouble(v), 1, "x"), v);
  }
  EXPECT_THROW(parseDouble("1.5x", 3, "x"), ParseError);
  EXPECT_THROW(parseInteger("2.5", 3, "n"), ParseError);
}

TEST(KeyValues, CommentsAndErrors) {
  const auto kv = parseKeyValues("# header\n\nalpha = 1 # trailing\n beta=two words \n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].key, "alpha");
  EXPECT_EQ(kv[0].value, "1");
  EXPECT_EQ(kv[1].value, "two words");
  EXPECT_EQ(kv[1].line, 4);
  EXPECT_EQ(parseErrorLine([] { parseKeyValues("a = 1\nnot a pair\n"); }), 2);
  EXPECT_EQ(parseErrorLine([] { KeyValueMap(parseKeyValues("a = 1\na = 2\n")); }), 2);
}

TEST(PanelCsv, RoundTrip) {
  const PanelData d = simulateLcm(table1Truth(3, 7, 2)).data;
  const std::string text = formatPanelCsv(d);
  const PanelData back = parsePanelCsv(text);
  EXPECT_EQ(back.y, d.y);
  EXPECT_EQ(back.covariates, d.covariates);
  EXPECT_EQ(back.subjects, d.subjects);
  EXPECT_EQ(formatPanelCsv(back), text);
}

TEST(PanelCsv, AnyRowOrder) {
  const std::string text =
      "subject,component,t,value\n"
      "a,x,2,2.0\nb,x,1,3.0\na,x,1,1.0\nb,x,2,4.0\n";
  const PanelData d = parsePanelCsv(text);
  EXPECT_EQ(d.n, 2);
  EXPECT_EQ(d.T, 2);
  EXPECT_EQ(d.value(0, 0, 0), 1.0);
  EXPECT_EQ(d.value(1, 0, 1), 4.0);
}

TEST(PanelCsv, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parseErrorLine([] { parsePanelCsv("subject,component,time,value\n"); }), 1);
  EXPECT_EQ(parseErrorLine([] { parsePanelCsv("subject,component,t,value\na,x,1,1\na,x,2,-1\n"); }), 3);
  EXPECT_EQ(parseErrorLine([] { parsePanelCsv("subject,component,t,value\na,x,1,1\na,x,1,2\n"); }), 3);
  EXPECT_EQ(parseErrorLine([] { parsePanelCsv("subject,component,t,value,S\na,x,1,1\n"); }), 2);
  EXPECT_EQ(parseErrorLine([] { parsePanelCsv("subject,component,t,value,S\na,x,1,1,NaNx\n"); }), 2);
  EXPECT_THROW(parsePanelCsv("subject,component,t,value\na,x,1,1\na,x,3,1\nb,x,1,1\n"), ParseError);
}

TEST(TruthFile, RoundTrip) {
  SimulationTruth t = table2Truth(4, 9, 12);
  t.init = StateInit::Zero;
  std::string variant;
  const SimulationTruth back = parseTruth(formatTruth(t, "lcm-var"), &variant);
  EXPECT_EQ(variant, "lcm-var");
  EXPECT_EQ(back.phis[0], t.phis[0]);
  EXPECT_EQ(back.sigma, t.sigma);
  EXPECT_EQ(back.seed, 12u);
  EXPECT_EQ(back.init, StateInit::Zero);
  EXPECT_THROW(parseTruth("format = other/1\n"), Error);
}

TEST(FitFile, RoundTrip) {
  const SimulatedPanel sim = simulateLcm(table1Truth(3, 25, 4));
  const FitResult f = fitLcm<GammaFamily>(LcmSpec::make(Variant::Lcm2Ar, 1, {"S"}), sim.data);
  const std::string text = formatFit(f);
  const FitResult back = parseFit(text);
  EXPECT_EQ(formatFit(back), text);
  EXPECT_EQ(back.spec.interceptScope, InterceptScope::PerComponent);
  EXPECT_EQ(back.grid.mode, f.grid.mode);
  EXPECT_EQ(back.grid.negHessian, f.grid.negHessian);
  EXPECT_EQ(back.stateMean, f.stateMean);
  EXPECT_EQ(back.fixed.size(), f.fixed.size());
  EXPECT_EQ(back.diagnostics.converged, f.diagnostics.converged);
  EXPECT_THROW(parseFit("format = lcm-fit/1\nvariant = lcm-ar\n"), Error);
}

TEST(Ticks, TimestampsAndGrid) {
  const Tick t = parseTimestamp("2024-05-06T09:30:01.250Z", 4);
  EXPECT_EQ(t.date, "2024-05-06");
  EXPECT_DOUBLE_EQ(t.secondOfDay, 9 * 3600 + 30 * 60 + 1.25);
  EXPECT_DOUBLE_EQ(parseTimestamp("2024-05-06 10:00:00", 1).secondOfDay, 36000.0);
  EXPECT_EQ(parseErrorLine([] { parseTimestamp("2024-13-06T09:30:00", 7); }), 7);
  EXPECT_THROW(parseTimestamp("2024-05-06T09:30", 1), ParseError);

  std::vector<Tick> day;
  for (double s : {100.0, 290.0, 310.0, 640.0, 905.0}) {
    Tick k;
    k.secondOfDay = s;
    k.price = s;
    day.push_back(k);
  }
  // grid 300, 600, 900: last ticks 290, 310, 640
  EXPECT_EQ(lastTickGrid(day, 300.0), (std::vector<double>{290.0, 310.0, 640.0}));
}

TEST(Ticks, DailyFromTicksSkipsShortDays) {
  std::string csv = "symbol,timestamp,price\n";
  char buf[80];
  for (int k = 0; k <= 60; ++k) {
    std::snprintf(buf, sizeof buf, "AA,2024-01-02T%02d:%02d:00,%.2f\n", 10 + k / 60, k % 60, 100.0 + (k % 3));
    csv += buf;
  }
  csv += "AA,2024-01-03T10:00:00,100\nAA,2024-01-03T10:01:00,101\n";
  std::ostringstream warn;
  const auto ticks = parseTickCsv(csv);
  const auto days = dailyFromTicks(ticks, 60.0, -1, &warn);
  ASSERT_EQ(days.size(), 1u);
  EXPECT_EQ(days[0].date, "2024-01-02");
  EXPECT_NE(warn.str().find("2024-01-03"), std::string::npos);
  EXPECT_EQ(parseErrorLine([] { parseTickCsv("symbol,timestamp,price\nAA,2024-01-02T10:00:00,-1\n"); }), 2);
}

TEST(DailyCsv, RoundTripAndPanel) {
  std::vector<DailyMeasures> days;
  for (const char* sym : {"B", "A"})
    for (int d = 1; d <= 4; ++d) {
      DailyMeasures m;
      m.symbol = sym;
      m.date = "2024-01-0" + std::to_string(d);
      m.medrv = 1e-4 * d;
      m.rk = 1.1e-4 * d;
      m.bpv = 0.9e-4 * d;
      m.rv = 1.2e-4 * d;
      m.jump = m.rv - m.bpv;
      m.cont = m.bpv;
      days.push_back(m);
    }
  const auto back = parseDailyCsv(formatDailyCsv(days));
  ASSERT_EQ(back.size(), days.size());
  EXPECT_EQ(back[3].rk, days[3].rk);
  const PanelData p = buildVolatilityPanel(days);
  EXPECT_EQ(p.subjects, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(p.components, (std::vector<std::string>{"medrv", "rk", "bpv"}));
  EXPECT_EQ(p.T, 3);
  EXPECT_DOUBLE_EQ(p.value(0, 1, 0), std::sqrt(2.2e-4));
  EXPECT_DOUBLE_EQ(p.covariate("logLagY")[p.index(0, 1, 0)], 0.5 * std::log(1.1e-4));
  EXPECT_DOUBLE_EQ(p.covariate("logOnePlusJump")[p.index(1, 2, 2)], std::log1p(days[2].jump));
}
