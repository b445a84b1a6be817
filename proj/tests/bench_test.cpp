#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_util.hpp"
#include "thermofield/bench.hpp"

namespace thermofield {
namespace {

TEST(BenchPipeline, SingleSampleHasZeroSpread) {
    std::mt19937 rng(60);
    const std::vector<RawFrame> frames{testing::random_frame(rng, 64, 48)};
    const TimingRecord r = bench_pipeline(frames, FieldscaleParams{}, {1, 0});
    EXPECT_EQ(r.samples, 1u);
    EXPECT_EQ(r.fieldConstructionMs.stdDev, 0.0);
    EXPECT_EQ(r.rescalingMs.stdDev, 0.0);
    EXPECT_EQ(r.totalMs.stdDev, 0.0);
    EXPECT_GT(r.fieldConstructionMs.mean, 0.0);
    EXPECT_GT(r.rescalingMs.mean, 0.0);
    EXPECT_EQ(r.setting, BenchSetting::Default);
    EXPECT_EQ(r.width, 64);
    EXPECT_EQ(r.height, 48);
}

TEST(BenchPipeline, TotalIsSumOfPhasesAndCountsExcludeWarmup) {
    std::mt19937 rng(61);
    const std::vector<RawFrame> frames{testing::random_frame(rng, 80, 64), testing::random_frame(rng, 80, 64)};
    const TimingRecord r = bench_pipeline(frames, FieldscaleParams::fast(), {3, 5});
    EXPECT_EQ(r.samples, 6u);
    EXPECT_EQ(r.setting, BenchSetting::Fast);
    EXPECT_NEAR(r.totalMs.mean, r.fieldConstructionMs.mean + r.rescalingMs.mean, 1e-6);
}

TEST(BenchPipeline, RejectsBadInput) {
    EXPECT_THROW(bench_pipeline(std::vector<RawFrame>{}, FieldscaleParams{}), ParameterError);
    const std::vector<RawFrame> frames{RawFrame(16, 16)};
    EXPECT_THROW(bench_pipeline(frames, FieldscaleParams{}, {0, 0}), ParameterError);
    FieldscaleParams tooBig;
    tooBig.gridRows = 32;
    EXPECT_THROW(bench_pipeline(frames, tooBig), ParameterError);
}

TEST(BenchSweep, SingleValueAndLabels) {
    std::mt19937 rng(62);
    const std::vector<RawFrame> frames{testing::random_frame(rng, 64, 64)};
    const std::vector<double> seven{7};
    const auto recs = bench_sweep(frames, SweepAxis::MpIterations, seven, {2, 1});
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0].axis, "iters");
    EXPECT_EQ(recs[0].value, "7");
    EXPECT_EQ(recs[0].setting, BenchSetting::Default);
    EXPECT_EQ(recs[0].samples, 2u);
    EXPECT_THROW(bench_sweep(frames, SweepAxis::GridSize, std::vector<double>{}), ParameterError);
}

TEST(BenchSweep, AxisValuesApplyToDefaults) {
    EXPECT_EQ(with_axis_value(SweepAxis::GridSize, 16).gridRows, 16);
    EXPECT_EQ(with_axis_value(SweepAxis::GridSize, 16).effective_les_distance(), 4);
    EXPECT_EQ(with_axis_value(SweepAxis::LesDistance, 3).effective_les_distance(), 3);
    EXPECT_EQ(with_axis_value(SweepAxis::LesThreshold, 800).lesThreshold, 800.0);
    EXPECT_EQ(with_axis_value(SweepAxis::MpIterations, 1).mpIterations, 1);
    EXPECT_THROW(with_axis_value(SweepAxis::MpIterations, -1), ParameterError);
    EXPECT_EQ(format_axis_value(SweepAxis::LesThreshold, 100), "100");
    EXPECT_EQ(format_axis_value(SweepAxis::LesThreshold, 12.5), "12.5");
    EXPECT_EQ(parse_sweep_axis("les_distance"), SweepAxis::LesDistance);
    EXPECT_THROW(parse_sweep_axis("gamma"), ParameterError);
}

TEST(BenchSettings, OneRecordPerSettingInOrder) {
    std::mt19937 rng(64);
    const std::vector<RawFrame> frames{testing::random_frame(rng, 40, 32), testing::random_frame(rng, 40, 32)};
    FieldscaleParams custom;
    custom.gridRows = 4;
    const FieldscaleParams settings[] = {FieldscaleParams::fast(), custom, FieldscaleParams::defaults()};
    const auto recs = bench_settings(frames, settings, {3, 1});
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].setting, BenchSetting::Fast);
    EXPECT_EQ(recs[1].setting, BenchSetting::Custom);
    EXPECT_EQ(recs[2].setting, BenchSetting::Default);
    for (const auto& r : recs) EXPECT_EQ(r.samples, 6u);
    EXPECT_THROW(bench_settings(frames, std::span<const FieldscaleParams>{}, {}), ParameterError);
}

TEST(BenchSettings, MedianFieldDifference) {
    TimingRecord a, b;
    a.fieldConstructionSamples = {5.0, 1.0, 3.0, 9.0};
    b.fieldConstructionSamples = {4.0, 1.5, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(median_field_difference_ms(a, b), 1.5);  // diffs 1, -0.5, 2, 8
    a.fieldConstructionSamples.push_back(0.0);
    b.fieldConstructionSamples.push_back(0.0);
    EXPECT_DOUBLE_EQ(median_field_difference_ms(a, b), 1.0);
    b.fieldConstructionSamples.pop_back();
    EXPECT_THROW(median_field_difference_ms(a, b), ParameterError);
}

TEST(BenchSweep, MoreIterationsCostMore) {
    std::mt19937 rng(63);
    const std::vector<RawFrame> frames{testing::random_frame(rng, 64, 64)};
    const std::vector<double> iters{1, 400};
    const auto recs = bench_sweep(frames, SweepAxis::MpIterations, iters, {20, 3});
    EXPECT_LT(recs[0].fieldConstructionMs.mean, recs[1].fieldConstructionMs.mean);
}

TEST(TimingCsv, SchemaAndRowOrder) {
    TimingRecord r;
    r.setting = BenchSetting::Fast;
    r.fieldConstructionMs = {3.0, 0.5};
    r.rescalingMs = {5.0, 1.0};
    r.totalMs = {8.0, 1.2};
    r.samples = 10;
    r.width = 640;
    r.height = 512;
    std::ostringstream os;
    write_timing_csv(os, std::vector<TimingRecord>{r});
    EXPECT_EQ(os.str(),
              "setting,axis,value,phase,mean_ms,std_ms,samples,width,height\n"
              "fast,none,,field_construction,3,0.5,10,640,512\n"
              "fast,none,,rescaling,5,1,10,640,512\n"
              "fast,none,,total,8,1.2,10,640,512\n");
}

}  // namespace
}  // namespace thermofield
