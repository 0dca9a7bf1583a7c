#pragma once

// Accuracy, throughput and system time efficiency, plus the run CSV.

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "semcom/core.hpp"

namespace semcom {

template <class A, class B>
double accuracy(std::span<const A> pred, std::span<const B> truth) {
    if (pred.size() != truth.size()) throw UsageError("prediction/label length mismatch");
    if (pred.empty()) throw UsageError("accuracy needs at least one prediction");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += static_cast<std::uint64_t>(pred[i]) == static_cast<std::uint64_t>(truth[i]);
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

inline double accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth) {
    return accuracy(std::span<const std::size_t>(pred), std::span<const std::size_t>(truth));
}

/// Correct classifications achievable in the budget after training:
/// (budget - t_train) * U. Negative when training overruns the budget.
inline double system_time_efficiency(double time_budget_s, double t_train_s, double u_cps) {
    if (!(time_budget_s > 0.0)) throw UsageError("time budget must be > 0");
    if (!(u_cps >= 0.0)) throw UsageError("throughput must be >= 0");
    return (time_budget_s - t_train_s) * u_cps;
}

inline constexpr std::size_t min_throughput_messages = 100;

/// Correct classifications per second of communication-phase wall-clock.
inline double measure_throughput(std::size_t correct, std::size_t n_messages, double elapsed_s) {
    if (n_messages < min_throughput_messages)
        throw UsageError("throughput needs at least " + std::to_string(min_throughput_messages) + " messages");
    if (correct > n_messages) throw UsageError("more correct classifications than messages");
    if (!(elapsed_s > 0.0)) throw std::runtime_error("communication phase took zero measurable time");
    return static_cast<double>(correct) / elapsed_s;
}

/// Fixed per-sample cost replacing the wall clock. Every sample pass (one
/// communicated message, one training sample in one epoch, one point in one
/// affinity-propagation sweep) costs `cost_per_sample_s`.
struct DeterministicTime {
    double cost_per_sample_s = 1e-3;

    double communication_s(std::size_t n_messages) const { return cost_per_sample_s * double(n_messages); }
    double training_s(std::size_t passes, std::size_t samples) const {
        return cost_per_sample_s * double(passes) * double(samples);
    }
};

struct RunReport {
    std::string model;
    std::string channel;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_messages = 0;
    std::uint64_t bits_total = 0;
    double accuracy = 0.0;
    double t_train_s = 0.0;
    double u_cps = 0.0;
    double eta_t = 0.0;
    double time_budget_s = 100.0;
    std::vector<std::string> flags;

    void finalize() {
        eta_t = system_time_efficiency(time_budget_s, t_train_s, u_cps);
        if (t_train_s > time_budget_s) add_flag("budget_exceeded");
    }
    void add_flag(const std::string& f) {
        std::string clean;
        for (char c : f) clean.push_back((c == ',' || c == ';' || c == '\n' || c == '"') ? ' ' : c);
        flags.push_back(clean);
    }
};

inline const char* csv_header() {
    return "model,channel,snr_db,seed,n_messages,bits_total,accuracy,t_train_s,u_cps,eta_t,time_budget_s,flags";
}

inline std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string to_csv_row(const RunReport& r) {
    std::ostringstream os;
    os << r.model << ',' << r.channel << ',' << format_real(r.snr_db) << ',' << r.seed << ',' << r.n_messages << ','
       << r.bits_total << ',' << format_real(r.accuracy) << ',' << format_real(r.t_train_s) << ','
       << format_real(r.u_cps) << ',' << format_real(r.eta_t) << ',' << format_real(r.time_budget_s) << ',';
    for (std::size_t i = 0; i < r.flags.size(); ++i) os << (i ? ";" : "") << r.flags[i];
    return os.str();
}

inline double parse_real(const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

inline RunReport parse_csv_row(const std::string& line) {
    std::vector<std::string> cols;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cols.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cols.push_back(cur);
    if (cols.size() != 12) throw FormatError("CSV row has " + std::to_string(cols.size()) + " columns, expected 12");
    RunReport r;
    try {
        r.model = cols[0];
        r.channel = cols[1];
        r.snr_db = parse_real(cols[2]);
        r.seed = std::stoull(cols[3]);
        r.n_messages = std::stoull(cols[4]);
        r.bits_total = std::stoull(cols[5]);
        r.accuracy = parse_real(cols[6]);
        r.t_train_s = parse_real(cols[7]);
        r.u_cps = parse_real(cols[8]);
        r.eta_t = parse_real(cols[9]);
        r.time_budget_s = parse_real(cols[10]);
    } catch (const std::exception& e) {
        throw FormatError(std::string("bad CSV value: ") + e.what());
    }
    std::string f;
    std::istringstream fs(cols[11]);
    while (std::getline(fs, f, ';'))
        if (!f.empty()) r.flags.push_back(f);
    return r;
}

}  // namespace semcom
