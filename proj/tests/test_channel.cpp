#include "hetnet/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace hetnet;

namespace {

Technology tech400() { return Technology::from_center_frequency(0, 400e6, 1); }

SyntheticChannelParams no_fading() {
    SyntheticChannelParams p;
    p.fading = false;
    return p;
}

std::filesystem::path write_grid(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / ("hetnet_grid_" + name + ".csv");
    std::ofstream(path) << "tech_id,tx,rx,gain_linear\n" << body;
    return path;
}

template <typename F>
std::string error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Technology, BandwidthIsOnePercentOfCenterFrequency) {
    const auto t = Technology::from_center_frequency(0, 400e6, 4);
    EXPECT_DOUBLE_EQ(t.total_bandwidth, 4e6);
    EXPECT_DOUBLE_EQ(t.subband_bandwidth(), 1e6);
    EXPECT_THROW(Technology::from_center_frequency(0, 400e6, 0), Error);
}

TEST(ResourceSet, EnumeratesEverySubbandInTechnologyOrder) {
    ResourceSet rs({Technology::from_center_frequency(0, 400e6, 5), Technology::from_center_frequency(1, 900e6, 5),
                    Technology::from_center_frequency(2, 2.4e9, 5)});
    EXPECT_EQ(rs.size(), 15);
    EXPECT_EQ(rs.index_of({1, 0}), 5);
    EXPECT_EQ(rs[14], (CommResource{2, 4}));
    for (int i = 0; i < rs.size(); ++i) EXPECT_EQ(rs.index_of(rs[i]), i);
    EXPECT_FALSE(rs.contains({0, 5}));
    EXPECT_THROW(rs.index_of({3, 0}), Error);
}

TEST(SyntheticGain, FreeSpaceTermAtReferenceDistance) {
    const double g = synthetic_gain({0, 0, 0}, {1, 0, 0}, tech400(), 0, no_fading());
    const double expected = std::pow(299792458.0 / (4.0 * 3.14159265358979323846 * 4e8), 2.0);
    EXPECT_NEAR(g, expected, 1e-15);
    EXPECT_NEAR(g, 3.56e-3, 0.01e-3);
}

TEST(SyntheticGain, PathLossExponentThreeAt400MHz) {
    const double g1 = synthetic_gain({0, 0, 0}, {1, 0, 0}, tech400(), 0, no_fading());
    const double g10 = synthetic_gain({0, 0, 0}, {10, 0, 0}, tech400(), 0, no_fading());
    EXPECT_NEAR(g10 / g1, 1e-3, 1e-15);
    EXPECT_DOUBLE_EQ(path_loss_exponent(4e9), 3.5);
}

TEST(SyntheticGain, SymmetricAndDeterministicWithFading) {
    const auto t = Technology::from_center_frequency(2, 2.4e9, 3);
    const Vec3 a{12.5, 40.0, 3.0}, b{100.0, 7.25, 8.0};
    const double ab = synthetic_gain(a, b, t, 99);
    EXPECT_EQ(ab, synthetic_gain(b, a, t, 99));
    EXPECT_EQ(ab, synthetic_gain(a, b, t, 99));
    EXPECT_NE(ab, synthetic_gain(a, b, t, 100));
}

TEST(SyntheticGain, CoincidentNodesRejected) {
    EXPECT_EQ(error_of([] { synthetic_gain({1, 2, 3}, {1, 2, 3}, tech400(), 0); }), "coincident nodes");
}

TEST(SyntheticGain, NonIncreasingInDistanceWithoutFading) {
    for (double fc : {400e6, 900e6, 2.4e9}) {
        const auto t = Technology::from_center_frequency(0, fc, 1);
        double previous = std::numeric_limits<double>::infinity();
        for (double d = 0.5; d < 400.0; d *= 1.07) {
            const double g = synthetic_gain({0, 0, 0}, {d, 0, 0}, t, 0, no_fading());
            EXPECT_LE(g, previous);
            previous = g;
        }
    }
}

TEST(SyntheticGain, ShadowingSpreadMatchesSigma) {
    const auto t = tech400();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const Vec3 a{u(rng), u(rng), 1.0}, b{u(rng), u(rng), 2.0};
        const double db = 10.0 * std::log10(synthetic_gain(a, b, t, 3) / synthetic_gain(a, b, t, 3, no_fading()));
        sum += db;
        sum_sq += db * db;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    EXPECT_NEAR(mean, 0.0, 0.2);
    EXPECT_NEAR(sd, 6.0, 0.2);
}

TEST(ChannelTable, SynthesizedTableIsReciprocalAndPositive) {
    std::vector<Vec3> pos{{0, 0, 0}, {10, 0, 0}, {0, 30, 2}, {80, 80, 5}};
    ResourceSet rs({Technology::from_center_frequency(0, 400e6, 2), Technology::from_center_frequency(1, 2.4e9, 2)});
    const auto table = synthesize_channel_table(pos, rs, 11);
    EXPECT_NO_THROW(table.validate());
    for (int t = 0; t < 2; ++t)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                if (a != b) {
                    EXPECT_GT(table.gain(t, a, b), 0.0);
                    EXPECT_EQ(table.gain(t, a, b), table.gain(t, b, a));
                }
}

TEST(GainGrid, TwoNodeReadback) {
    const auto path = write_grid("ok", "0,0,1,1e-6\n0,1,0,1e-6\n");
    const auto table = load_gain_grid(path);
    EXPECT_EQ(table.num_nodes(), 2);
    EXPECT_EQ(table.num_technologies(), 1);
    EXPECT_DOUBLE_EQ(table.gain(0, 0, 1), 1e-6);
    EXPECT_DOUBLE_EQ(table.gain(0, 1, 0), 1e-6);
    EXPECT_NO_THROW(load_gain_grid(path, 2));
}

TEST(GainGrid, NonPositiveGainRejected) {
    const auto path = write_grid("neg", "0,0,1,0\n0,1,0,0\n");
    EXPECT_NE(error_of([&] { load_gain_grid(path); }).find("non-positive gain"), std::string::npos);
}

TEST(GainGrid, MissingPairRejected) {
    const auto path = write_grid("missing", "0,0,1,1e-6\n");
    EXPECT_NE(error_of([&] { load_gain_grid(path); }).find("incomplete matrix"), std::string::npos);
}

TEST(GainGrid, MalformedRowRejected) {
    EXPECT_NE(error_of([&] { load_gain_grid(write_grid("short", "0,0,1\n")); }).find("malformed row"),
              std::string::npos);
    EXPECT_NE(error_of([&] { load_gain_grid(write_grid("text", "0,zero,1,1e-6\n0,1,0,1e-6\n")); }).find("malformed"),
              std::string::npos);
}

TEST(GainGrid, NodeCountMismatchRejected) {
    const auto path = write_grid("count", "0,0,1,1e-6\n0,1,0,1e-6\n");
    EXPECT_NE(error_of([&] { load_gain_grid(path, 3); }).find("node-count mismatch"), std::string::npos);
}

TEST(GainGrid, AsymmetricPairRejected) {
    const auto path = write_grid("asym", "0,0,1,1e-6\n0,1,0,2e-6\n");
    EXPECT_NE(error_of([&] { load_gain_grid(path); }).find("non-reciprocal"), std::string::npos);
}

TEST(GainGrid, DiagonalRowsIgnored) {
    const auto path = write_grid("diag", "0,0,0,5\n0,0,1,1e-6\n0,1,0,1e-6\n0,1,1,5\n");
    EXPECT_DOUBLE_EQ(load_gain_grid(path).gain(0, 0, 1), 1e-6);
}
