#include "gaitid/signal_io.hpp"
#include "gaitid/synthetic.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;
using namespace gaitid;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "gaitid_signal_io";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_text(const std::string& name, const std::string& body) {
    const auto p = scratch(name);
    std::ofstream(p) << body;
    return p;
}

SignalRecording ramp(std::size_t n) {
    SignalRecording r;
    r.subject_id = "s";
    for (std::size_t i = 0; i < n; ++i) r.samples.push_back({double(i), 2.0 * double(i), 5.0});
    return r;
}

}  // namespace

TEST(LoadCsv, TwoRows) {
    const auto rec = load_csv_recording(write_text("two.csv", "0.00,0.1,9.8,0.3\n0.02,0.1,9.7,0.2\n"));
    ASSERT_EQ(rec.size(), 2u);
    EXPECT_DOUBLE_EQ(rec.samples[1][1], 9.7);
}

TEST(LoadCsv, HeaderIsOptional) {
    LoadDiagnostics diag;
    const auto rec = load_csv_recording(write_text("hdr.csv", "t,ax,ay,az\n0,1,2,3\n"), &diag);
    EXPECT_EQ(rec.size(), 1u);
    EXPECT_TRUE(diag.had_header);
}

TEST(LoadCsv, NonNumericNamesLine) {
    try {
        load_csv_recording(write_text("bad.csv", "0.00,0.1,9.8,0.3\n0.02,abc,9.7,0.2\n"));
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(LoadCsv, WrongColumnCount) {
    EXPECT_THROW(load_csv_recording(write_text("cols.csv", "0,1,2\n")), ParseError);
}

TEST(LoadCsv, EmptyFile) { EXPECT_THROW(load_csv_recording(write_text("empty.csv", "")), EmptyInputError); }

TEST(LoadCsv, BackwardsTimestampsAreCountedNotFatal) {
    LoadDiagnostics diag;
    load_csv_recording(write_text("mono.csv", "0.04,1,1,1\n0.02,1,1,1\n"), &diag);
    EXPECT_EQ(diag.non_monotonic_timestamps, 1u);
}

TEST(LoadCsv, RoundTrip) {
    SignalRecording r;
    r.samples = {{0.1, -9.80665, 1e-7}, {1.0 / 3.0, 2.5e3, -0.125}};
    const auto p = scratch("rt.csv");
    save_csv_recording(r, p);
    const auto back = load_csv_recording(p);
    ASSERT_EQ(back.size(), r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(back.samples[i][k], r.samples[i][k], 1e-9);
}

TEST(CustomTree, RoundTripKeepsMetadata) {
    SyntheticSpec spec;
    spec.users = 2;
    spec.sessions = 1;
    spec.duration_s = 1.0;
    const auto recs = generate_synthetic_dataset(spec);
    const auto root = scratch("tree");
    fs::remove_all(root);
    save_custom_tree(recs, root);
    const auto back = load_custom_tree(root);
    ASSERT_EQ(back.size(), recs.size());
    std::size_t matched = 0;
    for (const auto& b : back)
        for (const auto& r : recs)
            if (r.subject_id == b.subject_id && r.sensor == b.sensor && r.sub_activity == b.sub_activity &&
                r.session == b.session) {
                ++matched;
                for (std::size_t i = 0; i < r.size(); ++i)
                    for (int k = 0; k < 3; ++k) EXPECT_NEAR(b.samples[i][k], r.samples[i][k], 1e-9);
            }
    EXPECT_EQ(matched, recs.size());
}

TEST(HarLayout, RowsBecome128SampleRecordings) {
    const auto dir = scratch("har");
    fs::remove_all(dir);
    fs::create_directories(dir / "Inertial Signals");
    for (const char* axis : {"x", "y", "z"}) {
        std::ofstream f(dir / "Inertial Signals" / (std::string("total_acc_") + axis + "_train.txt"));
        for (int row = 0; row < 3; ++row) {
            for (std::size_t t = 0; t < kHarWindowSamples; ++t) f << "  " << (row + 1) * 0.5;
            f << '\n';
        }
    }
    std::ofstream(dir / "subject_train.txt") << "1\n1\n2\n";
    std::ofstream(dir / "y_train.txt") << "1\n4\n1\n";
    const auto all = load_har_directory(dir, Sensor::ACC);
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0].size(), 128u);  // 2.56 s at 50 Hz
    EXPECT_NEAR(all[2].samples[0][0], 1.5 * kGravity, 1e-12);
    EXPECT_EQ(load_har_directory(dir, Sensor::ACC, 1).size(), 2u);
    EXPECT_THROW(load_har_directory(dir, Sensor::LACC), Error);
}

TEST(Filter, ConstantUnchanged) {
    SignalRecording r;
    r.samples.assign(10, {5.0, 5.0, 5.0});
    const auto f = moving_average_filter(r, 3);
    for (const auto& s : f.samples) EXPECT_DOUBLE_EQ(s[0], 5.0);
}

TEST(Filter, TruncatedEnds) {
    const auto f = moving_average_filter(ramp(4), 3);
    const std::vector<double> want{0.5, 1.0, 2.0, 2.5};  // axis [0,1,2,3]; [1,2,3,4] shifted by one
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(f.samples[i][0], want[i]);
}

TEST(Filter, HandExample) {
    SignalRecording r;
    for (double v : {1.0, 2.0, 3.0, 4.0}) r.samples.push_back({v, v, v});
    const auto f = moving_average_filter(r, 3);
    const std::vector<double> want{1.5, 2.0, 3.0, 3.5};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(f.samples[i][2], want[i]);
}

TEST(Filter, BadOrders) {
    EXPECT_THROW(moving_average_filter(ramp(10), 4), InvalidParameterError);
    EXPECT_THROW(moving_average_filter(ramp(2), 3), InvalidParameterError);
}

TEST(Segment, ExactTiling) {
    const auto w = segment_windows(ramp(100), 50, 0.0);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w[1].axes[0].front(), 50.0);
    EXPECT_EQ(w[1].axes[0].back(), 99.0);
}

TEST(Segment, TrailingPartialDropped) { EXPECT_EQ(segment_windows(ramp(128), 128, 0.5).size(), 1u); }

TEST(Segment, HalfOverlapStarts) {
    const auto w = segment_windows(ramp(200), 50, 0.5);
    ASSERT_EQ(w.size(), 7u);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w[i].axes[0].front(), 25.0 * double(i));
}

TEST(Segment, TooLong) { EXPECT_THROW(segment_windows(ramp(10), 50, 0.0), EmptyInputError); }

TEST(Segment, CountFormula) {
    for (std::size_t n : {8u, 31u, 100u, 257u})
        for (std::size_t ws : {8u, 25u, 50u})
            for (double ov : {0.0, 0.25, 0.5, 0.9}) {
                if (ws > n) continue;
                const auto stride = window_stride(ws, ov);
                EXPECT_EQ(segment_windows(ramp(n), ws, ov).size(), (n - ws) / stride + 1);
            }
}

TEST(Segment, MetadataAndEqualAxes) {
    auto r = ramp(60);
    r.sensor = Sensor::LACC;
    r.sub_activity = SubActivity::FRP;
    for (const auto& w : segment_windows(r, 25, 0.0)) {
        EXPECT_EQ(w.sensor, Sensor::LACC);
        EXPECT_EQ(w.sub_activity, SubActivity::FRP);
        EXPECT_EQ(w.axes[0].size(), 25u);
        EXPECT_EQ(w.axes[1].size(), w.axes[2].size());
    }
}

// Filtering the recording then windowing matches filtering the window's own span for
// windows away from the recording ends.
TEST(Segment, FilterThenSegmentInteriorMeans) {
    SignalRecording r;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int i = 0; i < 300; ++i) r.samples.push_back({z(rng), z(rng), z(rng)});
    const auto wins = segment_windows(moving_average_filter(r, 3), 50, 0.0);
    for (std::size_t w = 1; w + 1 < wins.size(); ++w) {
        // The window's filtered values come from raw samples [start-1, start+50].
        const std::size_t start = w * 50;
        double want = 0.0;
        for (std::size_t t = start; t < start + 50; ++t) {
            double s = 0.0;
            for (std::size_t j = t - 1; j <= t + 1; ++j) s += r.samples[j][0];
            want += s / 3.0;
        }
        double got = 0.0;
        for (double v : wins[w].axes[0]) got += v;
        EXPECT_NEAR(got / 50.0, want / 50.0, 1e-12);
    }
}

TEST(Recording, Validate) {
    SignalRecording r;
    EXPECT_THROW(r.validate(), EmptyInputError);
    r.samples.push_back({0.0, NAN, 0.0});
    EXPECT_THROW(r.validate(), InvalidInputError);
}
