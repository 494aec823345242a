#include <cmath>

#include <gtest/gtest.h>

#include "eprtele/io.hpp"
#include "eprtele/sweep.hpp"

namespace {

using namespace eprtele;

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.grid = GridSpec{1000.0, 1032.0, 32};
  cfg.omega1_center = 1016.0;
  cfg.omega2_center = 1016.0;
  cfg.points = {{-0.9, 1.5}, {-0.9, 2.0}, {-0.99, 1.5}, {-0.99, 2.0}, {-0.999, 1.5}, {-0.999, 2.0}};
  cfg.input = InputSpec{1016.5, 1.5, 0.0};
  cfg.window = AcceptanceWindow{1.0, 4.0};
  return cfg;
}

TEST(Sweep, RecordsFollowScheduleOrder) {
  const SweepConfig cfg = small_config();
  const auto records = run_sweep(cfg);
  ASSERT_EQ(records.size(), cfg.points.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].mu, cfg.points[i].mu);
    EXPECT_EQ(records[i].sigma, cfg.points[i].sigma);
    EXPECT_EQ(records[i].flag, RecordFlag::Ok) << records[i].message;
    EXPECT_NEAR(records[i].sigma2_1_minus_mu2, cfg.points[i].sigma * cfg.points[i].sigma *
                                                    (1.0 - cfg.points[i].mu * cfg.points[i].mu),
                1e-15);
    EXPECT_LT(records[i].completeness_residual, 1e-9);
    EXPECT_GE(records[i].efficiency, 0.0);
    EXPECT_LE(records[i].efficiency, 1.0);
    EXPECT_GE(records[i].avg_fidelity_corrected, 0.0);
    EXPECT_LE(records[i].avg_fidelity_corrected, 1.0);
  }
}

TEST(Sweep, IdenticalOutputForAnyWorkerCount) {
  const SweepConfig cfg = small_config();
  const std::string one = sweep_csv(run_sweep(cfg, 1));
  EXPECT_EQ(one, sweep_csv(run_sweep(cfg, 2)));
  EXPECT_EQ(one, sweep_csv(run_sweep(cfg, 5)));
}

TEST(Sweep, TailViolationFlaggedWithoutAborting) {
  SweepConfig cfg = small_config();
  cfg.points = {{-0.9, 1.5}, {-0.9, 6.0}, {-0.99, 2.0}};
  const auto records = run_sweep(cfg);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].flag, RecordFlag::Ok);
  EXPECT_EQ(records[1].flag, RecordFlag::TailViolation);
  EXPECT_TRUE(std::isnan(records[1].efficiency));
  EXPECT_GT(records[1].tail_mass, 1e-8);
  EXPECT_EQ(records[2].flag, RecordFlag::Ok);
  const std::string csv = sweep_csv(records);
  EXPECT_NE(csv.find("TAIL_VIOLATION"), std::string::npos);
}

TEST(Sweep, IncompleteOutcomeGridFlagged) {
  SweepConfig cfg = small_config();
  cfg.time_fraction = 0.5;
  cfg.points = {{-0.9, 1.5}};
  const auto records = run_sweep(cfg);
  EXPECT_EQ(records[0].flag, RecordFlag::Incomplete);
  EXPECT_GT(records[0].completeness_residual, 0.1);
}

TEST(Sweep, CsvHeaderAndRowCount) {
  const std::string csv = sweep_csv(run_sweep(small_config()));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSweepCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Verify, PassesOnHealthyConfig) {
  SweepConfig cfg = small_config();
  cfg.points = {{-0.9, 1.5}, {-0.99, 2.0}};
  const VerificationReport report = verify(cfg);
  for (const auto& c : report.checks) {
    EXPECT_NE(c.status, CheckStatus::Fail) << c.name << " " << c.detail;
  }
  EXPECT_TRUE(report.passed());
  ASSERT_NE(report.find("NULL_CHANNEL"), nullptr);
  EXPECT_EQ(report.find("NULL_CHANNEL")->status, CheckStatus::Pass);
}

TEST(Verify, DenseOraclesRunOnSmallGrid) {
  SweepConfig cfg;
  cfg.grid = GridSpec{100.0, 108.0, 8};
  cfg.omega1_center = cfg.omega2_center = 104.0;
  cfg.points = {{0.0, 0.6}, {-0.95, 0.6}};
  cfg.input = InputSpec{104.0, 0.6, 0.3};
  cfg.window = AcceptanceWindow{1.0, 1.0};
  const VerificationReport report = verify(cfg);
  EXPECT_TRUE(report.passed());
  const CheckResult* ns = report.find("NO_SIGNALING[mu=-0.95,sigma=0.6]");
  ASSERT_NE(ns, nullptr);
  EXPECT_EQ(ns->status, CheckStatus::Pass);
}

TEST(Verify, DetectsTruncatedTimeRange) {
  SweepConfig cfg = small_config();
  cfg.points = {{-0.9, 1.5}};
  cfg.time_fraction = 0.5;
  const VerificationReport report = verify(cfg);
  EXPECT_FALSE(report.passed());
  EXPECT_EQ(report.find("COMPLETENESS")->status, CheckStatus::Fail);
}

TEST(Verify, DetectsInputAtGridEdge) {
  SweepConfig cfg = small_config();
  cfg.points = {{-0.9, 1.5}};
  cfg.input.center = 1002.0;
  const VerificationReport report = verify(cfg);
  EXPECT_FALSE(report.passed());
  EXPECT_EQ(report.find("INPUT_TAIL_MASS")->status, CheckStatus::Fail);
}

TEST(Verify, WarnsWhenMirrorConventionLoses) {
  // Near the ideal limit (marginal width 3x the input width) the doubled
  // mirror wins; the single one is flagged but does not fail verification.
  SweepConfig cfg = small_config();
  cfg.grid = GridSpec{1000.0, 1064.0, 64};
  cfg.omega1_center = cfg.omega2_center = 1032.0;
  cfg.input.center = 1032.5;
  cfg.points = {{-0.999, 4.5}};
  cfg.mirror = MirrorConvention::PumpMinusOmegaMinus;
  const VerificationReport report = verify(cfg);
  EXPECT_EQ(report.find("MIRROR_CONVENTION")->status, CheckStatus::Warn);
  EXPECT_TRUE(report.passed());
  cfg.mirror = MirrorConvention::PumpMinusTwiceOmegaMinus;
  EXPECT_EQ(verify(cfg).find("MIRROR_CONVENTION")->status, CheckStatus::Pass);
}

TEST(Verify, TextReportEndsWithVerdict) {
  SweepConfig cfg = small_config();
  cfg.points = {{-0.9, 1.5}};
  const std::string text = verification_text(verify(cfg));
  EXPECT_NE(text.find("verify: all checks passed"), std::string::npos);
}

}  // namespace
