#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "semcom/metrics.hpp"

using namespace semcom;

TEST(Accuracy, Examples) {
    const std::vector<std::size_t> a{1, 2, 3}, b{0, 0, 0};
    EXPECT_EQ(accuracy(a, a), 1.0);
    EXPECT_EQ(accuracy(a, std::vector<std::size_t>{2, 3, 4}), 0.0);
    std::vector<std::size_t> pred(2000, 0), truth(2000, 0);
    for (std::size_t i = 1793; i < 2000; ++i) pred[i] = 1;
    EXPECT_DOUBLE_EQ(accuracy(pred, truth), 0.8965);
    EXPECT_THROW(accuracy(a, std::vector<std::size_t>{1}), UsageError);
}

TEST(TimeEfficiency, Examples) {
    EXPECT_EQ(system_time_efficiency(100, 0, 50), 5000.0);
    EXPECT_EQ(system_time_efficiency(100, 40, 50), 3000.0);
    EXPECT_EQ(system_time_efficiency(100, 120, 50), -1000.0);
    EXPECT_THROW(system_time_efficiency(0, 0, 1), UsageError);
    EXPECT_THROW(system_time_efficiency(100, 0, -1), UsageError);
}

TEST(TimeEfficiency, OverrunIsFlagged) {
    RunReport r;
    r.t_train_s = 120;
    r.u_cps = 50;
    r.finalize();
    EXPECT_EQ(r.eta_t, -1000.0);
    ASSERT_EQ(r.flags.size(), 1u);
    EXPECT_EQ(r.flags[0], "budget_exceeded");
}

TEST(TimeEfficiency, ZeroTrainingNeverLoses) {
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const double budget = rng.uniform(1, 200), u = rng.uniform(0, 1000), train = rng.uniform(1e-9, 300);
        EXPECT_GE(system_time_efficiency(budget, 0, u), system_time_efficiency(budget, train, u));
    }
}

TEST(Throughput, Examples) {
    EXPECT_DOUBLE_EQ(measure_throughput(1800, 2000, 3.6), 500.0);
    DeterministicTime det;
    EXPECT_DOUBLE_EQ(measure_throughput(1800, 2000, det.communication_s(2000)), 900.0);
    EXPECT_THROW(measure_throughput(50, 99, 1.0), UsageError);
    EXPECT_THROW(measure_throughput(101, 100, 1.0), UsageError);
    EXPECT_THROW(measure_throughput(10, 100, 0.0), std::runtime_error);
}

TEST(Throughput, IsARate) {
    // Wall-clock work proportional to message count.
    auto timed = [](std::size_t n) {
        const auto start = std::chrono::steady_clock::now();
        volatile double sink = 0;
        for (std::size_t i = 0; i < n * 20000; ++i) sink = sink + std::sqrt(double(i));
        const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return measure_throughput(n * 9 / 10, n, el);
    };
    double best = 1e9;
    for (int attempt = 0; attempt < 5 && best >= 0.2; ++attempt) {
        const double u1 = timed(500), u2 = timed(1000);
        best = std::min(best, std::abs(u2 - u1) / u1);
    }
    EXPECT_LT(best, 0.2);
}

TEST(DeterministicTimeModel, Costs) {
    DeterministicTime det;
    EXPECT_DOUBLE_EQ(det.communication_s(2000), 2.0);
    EXPECT_DOUBLE_EQ(det.training_s(5, 1000), 5.0);
}

TEST(Csv, GoldenHeader) {
    std::ifstream in(SEMCOM_TEST_DATA "/csv_header.golden");
    std::string golden;
    ASSERT_TRUE(std::getline(in, golden));
    EXPECT_EQ(golden, csv_header());
}

TEST(Csv, RowRoundTripsExactly) {
    RunReport r;
    r.model = "sem_comp";
    r.channel = "rayleigh_inverted";
    r.snr_db = 7.5;
    r.seed = 42;
    r.n_messages = 2000;
    r.bits_total = 20000;
    r.accuracy = 0.8965;
    r.t_train_s = 1.0 / 3.0;
    r.u_cps = 12345.678901234567;
    r.finalize();
    r.add_flag("K=944");
    r.add_flag("odd,flag;here");
    const auto back = parse_csv_row(to_csv_row(r));
    EXPECT_EQ(back.model, r.model);
    EXPECT_EQ(back.channel, r.channel);
    EXPECT_EQ(back.snr_db, r.snr_db);
    EXPECT_EQ(back.seed, r.seed);
    EXPECT_EQ(back.bits_total, r.bits_total);
    EXPECT_EQ(back.accuracy, r.accuracy);
    EXPECT_EQ(back.t_train_s, r.t_train_s);
    EXPECT_EQ(back.u_cps, r.u_cps);
    EXPECT_EQ(back.eta_t, r.eta_t);
    EXPECT_EQ(back.eta_t, (back.time_budget_s - back.t_train_s) * back.u_cps);
    EXPECT_EQ(back.flags, (std::vector<std::string>{"K=944", "odd flag here"}));
}

TEST(Csv, InfiniteSnrAndBadRows) {
    RunReport r;
    r.snr_db = std::numeric_limits<double>::infinity();
    EXPECT_TRUE(std::isinf(parse_csv_row(to_csv_row(r)).snr_db));
    EXPECT_THROW(parse_csv_row("a,b,c"), FormatError);
    EXPECT_THROW(parse_csv_row("m,awgn,x,1,1,1,1,1,1,1,1,"), FormatError);
}
