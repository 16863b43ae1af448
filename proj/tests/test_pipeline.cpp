#include <gtest/gtest.h>

#include <filesystem>

#include "okflow/pipeline.hpp"

using namespace okflow;
namespace fs = std::filesystem;

namespace {

Config canonical(const std::string& name) { return load_config(std::string(OKFLOW_CONFIG_DIR) + "/canonical-" + name + ".cfg"); }

Block box(std::vector<Interval> f, double C) {
  Block b;
  b.kind = BlockKind::stable;
  b.set = ScbSet(IVector(std::move(f)), TailBound{C, 6, 0, 1});
  b.Q = ConeForm::stable(b.set.M());
  return b;
}

ScbSet point(std::vector<double> a, double C) {
  std::vector<Interval> f;
  for (double x : a) f.emplace_back(x);
  return ScbSet(IVector(std::move(f)), TailBound{C, 6, 0, 1});
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("okflow_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Canonical local case cut down to a few steps.
Config short_run(long steps) {
  Config c = canonical("local");
  c.steps = steps;
  c.T = static_cast<double>(steps) * 0.002;
  c.warmup_steps = 0;
  c.verbosity = 0;
  return c;
}

}  // namespace

TEST(Pipeline, SupersetPassesInclusion) {
  Block target = box({Interval(-1, 1), Interval(-0.5, 0.5), Interval(-0.1, 0.1)}, 1e-2);
  InclusionResult r = check_inclusion(point({0.2, -0.1, 0.05}, 1e-3), target);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.pending, 0);
}

TEST(Pipeline, ShiftedCoordinateReportsIndex) {
  Block target = box({Interval(-1, 1), Interval(-0.5, 0.5), Interval(-0.1, 0.1)}, 1e-2);
  InclusionResult r = check_inclusion(point({0.2, -0.1, 0.3}, 1e-3), target);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.first_fail, 3);
  EXPECT_EQ(r.pending, 1);
  InclusionResult t = check_inclusion(point({0.2, -0.1, 0.05}, 1.0), target);
  EXPECT_FALSE(t.ok);
  EXPECT_EQ(t.first_fail, -1);
}

TEST(Pipeline, InclusionMonotoneInTargetSize) {
  ScbSet x = point({0.3, -0.2, 0.04, 0.01}, 1e-4);
  bool was = false;
  for (double s : {0.01, 0.03, 0.1, 0.3, 1.0}) {
    Block t = box({Interval::symmetric(s), Interval::symmetric(s), Interval::symmetric(s), Interval::symmetric(s)}, s);
    bool now = check_inclusion(x, t).ok;
    EXPECT_TRUE(now || !was) << s;
    was = now;
  }
  EXPECT_TRUE(was);
}

TEST(Pipeline, LohnerFormMatchesStandardForm) {
  // a structured set inside a framed target passes through both routes
  auto f = std::make_shared<Frame>();
  f->center = {0.1, 0.0};
  f->P = from_point({{1, 1}, {0, 1}});
  f->Pinv = from_point({{1, -1}, {0, 1}});
  Block target = box({Interval::symmetric(0.05), Interval::symmetric(0.05), Interval::symmetric(1e-3)}, 1e-3);
  target.set.frame = f;
  ScbSet x = point({0.11, 0.01, 0.0}, 1e-5);
  x.finite[0] = Interval(0.105, 0.115);
  LohnerSet S = LohnerSet::from_scb(x, 2);
  EXPECT_TRUE(check_inclusion(x, target).ok);
  EXPECT_TRUE(check_inclusion(S, target).ok);
  x.finite[1] = Interval(0.08);
  EXPECT_FALSE(check_inclusion(x, target).ok);
  EXPECT_FALSE(check_inclusion(LohnerSet::from_scb(x, 2), target).ok);
}

TEST(Pipeline, GzipLogRoundTrip) {
  fs::path d = scratch("gz");
  std::string text = "# step\n0\t0\t1\t2\t3\t-1\nscb M=1 s=6 C=0 start=2\n1 0 0\n";
  {
    LogFile f((d / "plain.txt").string(), false);
    f.stream() << text;
  }
  {
    LogFile g((d / "zipped.txt").string(), true);
    g.stream() << text;
  }
  EXPECT_TRUE(fs::exists(d / "zipped.txt.gz"));
  EXPECT_FALSE(fs::exists(d / "zipped.txt"));
  EXPECT_EQ(read_text_file((d / "plain.txt").string()), text);
  EXPECT_EQ(read_text_file((d / "zipped.txt.gz").string()), text);
  EXPECT_THROW(read_text_file((d / "missing.txt").string()), IoError);
  fs::remove_all(d);
}

TEST(Pipeline, OversizedUnstableBlockFailsAtCone) {
  Config c = canonical("local");
  c.halfwidth = 0.5;
  c.verbosity = 0;
  ProofReport r = prove(c);
  EXPECT_FALSE(r.pass());
  EXPECT_EQ(r.failed_stage, "cone_condition_unstable");
  EXPECT_LE(r.unstable_epsilon, 0);
  ASSERT_FALSE(r.stages.empty());
  EXPECT_NE(r.stages.back().detail.find("at k = "), std::string::npos) << r.stages.back().detail;
}

TEST(Pipeline, MissingFixedPointIsIoError) {
  Config c = short_run(1);
  c.fixed_point = "no-such-file.in";
  EXPECT_THROW(prove(c), IoError);
}

TEST(Pipeline, ShortRunsAreReproducible) {
  fs::path a = scratch("rep_a"), b = scratch("rep_b");
  Config c = short_run(30);
  ProveOptions oa{a.string(), nullptr}, ob{b.string(), nullptr};
  ProofReport ra = prove(c, oa), rb = prove(c, ob);
  EXPECT_EQ(ra.steps_done, 30);
  EXPECT_EQ(to_string(ra.final_set), to_string(rb.final_set));
  for (const char* f : {"num_integration_log.txt", "unstable_box_log.txt", "stable_box_log.txt"})
    EXPECT_EQ(read_text_file((a / "local" / f).string()), read_text_file((b / "local" / f).string())) << f;
  EXPECT_TRUE(fs::exists(a / "local" / "report.txt"));
  fs::remove_all(a);
  fs::remove_all(b);
}
