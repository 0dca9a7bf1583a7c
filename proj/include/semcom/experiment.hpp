#pragma once

// Experiment orchestration: `key = value` configs, the (model, channel, snr,
// seed) grid, CSV emission and the Table-2 / figure style summaries.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include "semcom/affinity.hpp"
#include "semcom/classifier.hpp"
#include "semcom/core.hpp"
#include "semcom/huffman.hpp"
#include "semcom/io.hpp"
#include "semcom/metrics.hpp"
#include "semcom/phy.hpp"
#include "semcom/quantizer.hpp"
#include "semcom/vqae.hpp"

namespace semcom {

enum class ModelKind { sem_quan, sem_comp, vqae, huffman_baseline };

inline std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::sem_quan: return "sem_quan";
        case ModelKind::sem_comp: return "sem_comp";
        case ModelKind::vqae: return "vqae";
        case ModelKind::huffman_baseline: return "huffman_baseline";
    }
    return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "sem_quan") return ModelKind::sem_quan;
    if (s == "sem_comp") return ModelKind::sem_comp;
    if (s == "vqae") return ModelKind::vqae;
    if (s == "huffman_baseline" || s == "huffman") return ModelKind::huffman_baseline;
    throw UsageError("unknown model '" + s + "'");
}

struct SyntheticConfig {
    std::uint32_t n_class = 4;
    std::size_t dim = 64;
    double spread = 0.1;
    std::size_t codebook_size = 1000;
    std::size_t train_size = 2000;
    std::size_t test_size = 2000;
};

struct ExperimentConfig {
    // Leave all three empty to use synthetic data.
    std::string codebook_path;
    std::string train_path;
    std::string test_path;
    // One message per line, aligned with the codebook / test datasets.
    std::string text_codebook_path;
    std::string text_test_path;
    SyntheticConfig synthetic;

    std::vector<ModelKind> models;
    std::vector<ChannelKind> channels{ChannelKind::awgn};
    std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0};
    std::vector<std::uint64_t> seeds{1};
    double time_budget_s = 100.0;

    APConfig ap;
    VqaeConfig vqae = VqaeConfig::stl10_like();
    bool vqae_codebook_auto = true;  // size taken from the AP cluster count
    TrainConfig classifier;
    double inversion_clip = 0.0;

    bool deterministic_time = false;
    DeterministicTime det;
    std::size_t jobs = 1;

    bool synthetic_data() const { return codebook_path.empty() && train_path.empty() && test_path.empty(); }

    void validate() const {
        if (models.empty()) throw UsageError("models list must not be empty");
        if (channels.empty()) throw UsageError("channels list must not be empty");
        if (snr_db.empty()) throw UsageError("snr_db list must not be empty");
        if (seeds.empty()) throw UsageError("seeds list must not be empty");
        if (!(time_budget_s > 0.0)) throw UsageError("time_budget_s must be > 0");
        if (!synthetic_data()) {
            for (const auto* p : {&codebook_path, &train_path, &test_path}) {
                if (p->empty()) throw UsageError("codebook_path, train_path and test_path must be given together");
                if (!std::filesystem::exists(*p)) throw UsageError("dataset file '" + *p + "' does not exist");
            }
        }
        for (const auto* p : {&text_codebook_path, &text_test_path})
            if (!p->empty() && !std::filesystem::exists(*p)) throw UsageError("text file '" + *p + "' does not exist");
        ap.validate();
        classifier.validate();
        if (!(det.cost_per_sample_s > 0.0)) throw UsageError("det_cost_per_sample_s must be > 0");
    }
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::uint64_t parse_uint(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("expected a non-negative integer, got '" + s + "'");
    return std::stoull(s);
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument("expected true/false, got '" + s + "'");
}

inline Preference parse_preference(const std::string& s) {
    if (s == "median") return Preference::median();
    if (s == "min" || s == "minimum") return Preference::minimum();
    return Preference::fixed(parse_real(s));
}

/// Split sizes and VQ-AE settings for the two dataset scales.
inline void apply_preset(ExperimentConfig& cfg, const std::string& name) {
    if (name == "agnews-like") {
        cfg.synthetic = {4, 512, 0.1, 10000, 10000, 2000};
        cfg.vqae = VqaeConfig::agnews_like();
    } else if (name == "stl10-like") {
        cfg.synthetic = {10, 512, 0.1, 1000, 10000, 2000};
        cfg.vqae = VqaeConfig::stl10_like();
    } else {
        throw std::invalid_argument("unknown preset '" + name + "' (agnews-like, stl10-like)");
    }
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters() {
    static const std::map<std::string, Setter> setters = {
        {"preset", [](ExperimentConfig&, const std::string&) {}},  // applied first
        {"codebook_path", [](ExperimentConfig& c, const std::string& v) { c.codebook_path = v; }},
        {"train_path", [](ExperimentConfig& c, const std::string& v) { c.train_path = v; }},
        {"test_path", [](ExperimentConfig& c, const std::string& v) { c.test_path = v; }},
        {"text_codebook_path", [](ExperimentConfig& c, const std::string& v) { c.text_codebook_path = v; }},
        {"text_test_path", [](ExperimentConfig& c, const std::string& v) { c.text_test_path = v; }},
        {"synth_classes",
         [](ExperimentConfig& c, const std::string& v) { c.synthetic.n_class = static_cast<std::uint32_t>(parse_uint(v)); }},
        {"synth_dim", [](ExperimentConfig& c, const std::string& v) { c.synthetic.dim = parse_uint(v); }},
        {"synth_spread", [](ExperimentConfig& c, const std::string& v) { c.synthetic.spread = parse_real(v); }},
        {"synth_codebook_size", [](ExperimentConfig& c, const std::string& v) { c.synthetic.codebook_size = parse_uint(v); }},
        {"synth_train_size", [](ExperimentConfig& c, const std::string& v) { c.synthetic.train_size = parse_uint(v); }},
        {"synth_test_size", [](ExperimentConfig& c, const std::string& v) { c.synthetic.test_size = parse_uint(v); }},
        {"models",
         [](ExperimentConfig& c, const std::string& v) {
             c.models.clear();
             for (const auto& m : split_list(v)) c.models.push_back(parse_model_kind(m));
         }},
        {"channels",
         [](ExperimentConfig& c, const std::string& v) {
             c.channels.clear();
             for (const auto& m : split_list(v)) c.channels.push_back(parse_channel_kind(m));
         }},
        {"snr_db",
         [](ExperimentConfig& c, const std::string& v) {
             c.snr_db.clear();
             for (const auto& m : split_list(v)) c.snr_db.push_back(parse_real(m));
         }},
        {"seeds",
         [](ExperimentConfig& c, const std::string& v) {
             c.seeds.clear();
             for (const auto& m : split_list(v)) c.seeds.push_back(parse_uint(m));
         }},
        {"time_budget_s", [](ExperimentConfig& c, const std::string& v) { c.time_budget_s = parse_real(v); }},
        {"ap_damping", [](ExperimentConfig& c, const std::string& v) { c.ap.damping = parse_real(v); }},
        {"ap_max_iterations", [](ExperimentConfig& c, const std::string& v) { c.ap.max_iterations = parse_uint(v); }},
        {"ap_convergence_window",
         [](ExperimentConfig& c, const std::string& v) { c.ap.convergence_window = parse_uint(v); }},
        {"ap_preference", [](ExperimentConfig& c, const std::string& v) { c.ap.preference = parse_preference(v); }},
        {"vqae_alpha", [](ExperimentConfig& c, const std::string& v) { c.vqae.alpha = parse_uint(v); }},
        {"vqae_latent_dim", [](ExperimentConfig& c, const std::string& v) { c.vqae.latent_dim = parse_uint(v); }},
        {"vqae_codebook_size",
         [](ExperimentConfig& c, const std::string& v) {
             c.vqae_codebook_auto = (v == "auto");
             if (!c.vqae_codebook_auto) c.vqae.codebook_size = parse_uint(v);
         }},
        {"vqae_beta", [](ExperimentConfig& c, const std::string& v) { c.vqae.beta = parse_real(v); }},
        {"vqae_batch_size", [](ExperimentConfig& c, const std::string& v) { c.vqae.train.batch_size = parse_uint(v); }},
        {"vqae_epochs", [](ExperimentConfig& c, const std::string& v) { c.vqae.train.epochs = parse_uint(v); }},
        {"vqae_lr", [](ExperimentConfig& c, const std::string& v) { c.vqae.train.initial_lr = parse_real(v); }},
        {"vqae_gamma", [](ExperimentConfig& c, const std::string& v) { c.vqae.train.scheduler_gamma = parse_real(v); }},
        {"clf_batch_size", [](ExperimentConfig& c, const std::string& v) { c.classifier.batch_size = parse_uint(v); }},
        {"clf_epochs", [](ExperimentConfig& c, const std::string& v) { c.classifier.epochs = parse_uint(v); }},
        {"clf_lr", [](ExperimentConfig& c, const std::string& v) { c.classifier.initial_lr = parse_real(v); }},
        {"clf_gamma", [](ExperimentConfig& c, const std::string& v) { c.classifier.scheduler_gamma = parse_real(v); }},
        {"batch_size",
         [](ExperimentConfig& c, const std::string& v) {
             c.classifier.batch_size = parse_uint(v);
             c.vqae.train.batch_size = c.classifier.batch_size;
         }},
        {"adam_beta1",
         [](ExperimentConfig& c, const std::string& v) {
             c.classifier.adam_beta1 = c.vqae.train.adam_beta1 = parse_real(v);
         }},
        {"adam_beta2",
         [](ExperimentConfig& c, const std::string& v) {
             c.classifier.adam_beta2 = c.vqae.train.adam_beta2 = parse_real(v);
         }},
        {"adam_eps",
         [](ExperimentConfig& c, const std::string& v) { c.classifier.adam_eps = c.vqae.train.adam_eps = parse_real(v); }},
        {"inversion_clip", [](ExperimentConfig& c, const std::string& v) { c.inversion_clip = parse_real(v); }},
        {"deterministic_time", [](ExperimentConfig& c, const std::string& v) { c.deterministic_time = parse_bool(v); }},
        {"det_cost_per_sample_s",
         [](ExperimentConfig& c, const std::string& v) { c.det.cost_per_sample_s = parse_real(v); }},
        {"jobs", [](ExperimentConfig& c, const std::string& v) { c.jobs = parse_uint(v); }},
    };
    return setters;
}

}  // namespace detail

/// Parses `key = value` lines (`#` starts a comment). Unknown keys, bad
/// values and a missing `models` key are reported with their line number.
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "config") {
    struct Entry {
        std::size_t line;
        std::string key, value;
    };
    std::vector<Entry> entries;
    std::istringstream is(text);
    std::string raw;
    std::size_t lineno = 0;
    std::set<std::string> seen;
    const auto& setters = detail::config_setters();
    while (std::getline(is, raw)) {
        ++lineno;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        Entry e{lineno, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1))};
        if (!setters.count(e.key))
            throw UsageError(source + ":" + std::to_string(lineno) + ": unknown key '" + e.key + "'");
        if (!seen.insert(e.key).second)
            throw UsageError(source + ":" + std::to_string(lineno) + ": duplicate key '" + e.key + "'");
        entries.push_back(std::move(e));
    }

    ExperimentConfig cfg;
    auto apply = [&](const Entry& e, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const std::exception& ex) {
            throw UsageError(source + ":" + std::to_string(e.line) + ": bad value for '" + e.key + "': " + ex.what());
        }
    };
    for (const auto& e : entries)
        if (e.key == "preset") apply(e, [&] { detail::apply_preset(cfg, e.value); });
    for (const auto& e : entries) apply(e, [&] { setters.at(e.key)(cfg, e.value); });
    if (!seen.count("models")) throw UsageError(source + ": missing required key 'models'");
    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Data

/// Class-flavoured pseudo-sentences so the Huffman baseline has text to code
/// when the embeddings are synthetic.
inline std::vector<std::string> synthetic_texts(std::span<const std::uint16_t> labels, std::uint32_t n_class,
                                                std::uint64_t seed) {
    static constexpr const char* syllables[] = {"ka", "lo", "mi", "ter", "sun", "ra", "vel", "on", "dis", "pre",
                                                "ta", "us", "en", "gro", "bar", "li", "mon", "ex", "co", "fa"};
    constexpr std::size_t n_syll = sizeof(syllables) / sizeof(syllables[0]);
    Rng rng = Rng::substream(seed, streams::text, 0);
    auto make_word = [&] {
        std::string w;
        const std::size_t parts = 1 + rng.uniform_index(3);
        for (std::size_t i = 0; i < parts; ++i) w += syllables[rng.uniform_index(n_syll)];
        return w;
    };
    std::vector<std::string> common(40);
    for (auto& w : common) w = make_word();
    std::vector<std::vector<std::string>> topical(n_class, std::vector<std::string>(30));
    for (auto& vocab : topical)
        for (auto& w : vocab) w = make_word();

    Rng msg_rng = Rng::substream(seed, streams::text, 1);
    std::vector<std::string> texts;
    texts.reserve(labels.size());
    for (auto label : labels) {
        std::string t;
        const std::size_t words = 20 + msg_rng.uniform_index(21);
        for (std::size_t i = 0; i < words; ++i) {
            if (i) t.push_back(' ');
            const auto& vocab = msg_rng.uniform(0.0, 1.0) < 0.4 ? topical[label % n_class] : common;
            t += vocab[msg_rng.uniform_index(vocab.size())];
        }
        t.push_back('.');
        texts.push_back(std::move(t));
    }
    return texts;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open text file '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

struct ExperimentData {
    LabeledDataset codebook;
    LabeledDataset train;
    LabeledDataset test;
    std::vector<std::string> codebook_texts;  // empty when unavailable
    std::vector<std::string> test_texts;
};

inline ExperimentData load_experiment_data(const ExperimentConfig& cfg, std::uint64_t seed) {
    ExperimentData d;
    if (cfg.synthetic_data()) {
        const auto& s = cfg.synthetic;
        const std::size_t total = s.codebook_size + s.train_size + s.test_size;
        if (s.codebook_size < 1 || s.train_size < 1 || s.test_size < 1)
            throw UsageError("synthetic split sizes must be >= 1");
        const std::size_t per_class = (total + s.n_class - 1) / s.n_class;
        const auto all = generate_synthetic(s.n_class, per_class, s.dim, s.spread, seed);
        Rng rng = Rng::substream(seed, streams::synthetic, 1);
        const auto mixed = shuffled(all, rng);
        d.codebook = mixed.slice(0, s.codebook_size);
        d.train = mixed.slice(s.codebook_size, s.train_size);
        d.test = mixed.slice(s.codebook_size + s.train_size, s.test_size);
        d.codebook_texts = synthetic_texts(d.codebook.labels, s.n_class, seed);
        d.test_texts = synthetic_texts(d.test.labels, s.n_class, seed ^ 0x5eedull);
    } else {
        d.codebook = load_dataset(cfg.codebook_path);
        d.train = load_dataset(cfg.train_path);
        d.test = load_dataset(cfg.test_path);
        if (d.codebook.dim() != d.train.dim() || d.codebook.dim() != d.test.dim())
            throw UsageError("dataset files disagree on embedding dimension");
        if (!cfg.text_codebook_path.empty()) d.codebook_texts = read_lines(cfg.text_codebook_path);
        if (!cfg.text_test_path.empty()) d.test_texts = read_lines(cfg.text_test_path);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Models

/// What the transmitter and receiver share after the (timed) build phase.
struct BuiltModel {
    ModelKind kind = ModelKind::sem_quan;
    Codebook codebook;  // sem_quan / sem_comp
    VqaeModel vqae;
    HuffmanTable huffman;
    double t_train_s = 0.0;
    std::size_t codewords = 0;
    std::vector<std::string> notes;

    unsigned bit_width() const { return index_bit_width(codewords); }
};

struct CommunicationOutcome {
    std::vector<std::size_t> predictions;
    std::size_t correct = 0;
    std::uint64_t bits_total = 0;
    double elapsed_s = 0.0;
    LinkStats link;
};

inline std::vector<std::uint64_t> encode_messages(const BuiltModel& m, const LabeledDataset& test) {
    std::vector<std::uint64_t> idx(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (m.kind == ModelKind::vqae)
            idx[i] = quantize_latent(m.vqae, encode(m.vqae, test.row(i))).index;
        else
            idx[i] = assign_index(m.codebook, test.row(i)).index;
    }
    return idx;
}

/// Index assignment -> link -> reconstruction -> classification; timed as a whole.
inline CommunicationOutcome communicate(const BuiltModel& m, const ClassifierModel& clf, const ExperimentData& data,
                                        const ChannelConfig& ch) {
    CommunicationOutcome out;
    const auto& test = data.test;
    const auto start = std::chrono::steady_clock::now();
    out.predictions.resize(test.size());
    if (m.kind == ModelKind::huffman_baseline) {
        if (data.test_texts.size() != test.size()) throw UsageError("test texts do not align with test embeddings");
        // Exact source coding: the receiver classifies the clean embedding.
        for (std::size_t i = 0; i < test.size(); ++i) {
            const auto bits = huffman_encode(m.huffman, data.test_texts[i]);
            const auto text = huffman_decode(m.huffman, bits);
            if (text != data.test_texts[i]) throw std::runtime_error("Huffman round trip failed");
            out.bits_total += bits.size();
            out.predictions[i] = classify(clf, test.row(i));
        }
    } else {
        const auto sent = encode_messages(m, test);
        const unsigned width = m.bit_width();
        const auto link = transmit_indices(sent, width, ch);
        out.link = link.stats;
        out.bits_total = link.stats.information_bits;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const auto idx = clamp_index(link.indices[i], m.codewords);
            if (m.kind == ModelKind::vqae) {
                const auto q_hat = reconstruct(m.vqae, idx);
                out.predictions[i] = classify(clf, q_hat);
            } else {
                out.predictions[i] = classify(clf, reconstruct(m.codebook, idx));
            }
        }
    }
    out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (std::size_t i = 0; i < test.size(); ++i) out.correct += out.predictions[i] == test.labels[i];
    return out;
}

inline APResult run_affinity(const LabeledDataset& ds, const APConfig& cfg, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, streams::affinity, 0);
    return affinity_propagation(similarity_matrix(ds, cfg.preference), cfg, rng);
}

/// Builds one model's codebook; `ap_clusters` is filled when AP ran.
inline BuiltModel build_model(ModelKind kind, const ExperimentConfig& cfg, const ExperimentData& data,
                              std::uint64_t seed, std::optional<std::size_t>& ap_clusters) {
    BuiltModel m;
    m.kind = kind;
    const auto start = std::chrono::steady_clock::now();
    auto wall = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    switch (kind) {
        case ModelKind::sem_quan:
            m.codebook = build_identity_codebook(data.codebook);
            m.codewords = m.codebook.size();
            m.t_train_s = 0.0;
            break;
        case ModelKind::sem_comp: {
            const auto ap = run_affinity(data.codebook, cfg.ap, seed);
            m.codebook = build_centroid_codebook(data.codebook, ap);
            m.codewords = m.codebook.size();
            m.t_train_s = cfg.deterministic_time ? cfg.det.training_s(ap.iterations_run, data.codebook.size()) : wall();
            ap_clusters = ap.clusters();
            m.notes.push_back("K=" + std::to_string(ap.clusters()));
            if (!ap.converged) m.notes.push_back("ap_not_converged");
            break;
        }
        case ModelKind::vqae: {
            VqaeConfig vcfg = cfg.vqae;
            vcfg.train.seed = seed;
            if (cfg.vqae_codebook_auto) {
                if (!ap_clusters) ap_clusters = run_affinity(data.codebook, cfg.ap, seed).clusters();
                vcfg.codebook_size = *ap_clusters;
            }
            auto trained = train_vqae(data.codebook, vcfg);
            m.vqae = std::move(trained.model);
            m.codewords = m.vqae.codebook_size();
            m.t_train_s =
                cfg.deterministic_time ? cfg.det.training_s(vcfg.train.epochs, data.codebook.size()) : trained.t_train_s;
            m.notes.push_back("codebook=" + std::to_string(m.codewords));
            if (trained.dead_codes) m.notes.push_back("dead_codes=" + std::to_string(trained.dead_codes));
            break;
        }
        case ModelKind::huffman_baseline: {
            if (data.codebook_texts.empty() || data.test_texts.empty())
                throw UsageError("huffman_baseline needs text_codebook_path and text_test_path");
            const auto t0 = std::chrono::steady_clock::now();
            m.huffman = build_huffman(data.codebook_texts);
            const double build = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            m.t_train_s = cfg.deterministic_time ? cfg.det.training_s(1, data.codebook_texts.size()) : build;
            m.codewords = m.huffman.size();
            break;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Grid

struct Table2Row {
    std::string model;
    double bits_total = 0.0;  // mean over seeds
    double accuracy = 0.0;    // mean over seeds, noiseless link
    double codewords = 0.0;
    std::size_t seeds = 0;
};

struct ExperimentResult {
    std::vector<RunReport> rows;
    std::vector<Table2Row> table2;
    double clean_accuracy = 0.0;  // classifier on clean test embeddings, mean over seeds
    bool all_ok = true;
};

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < std::min(jobs, n); ++t)
        workers.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& w : workers) w.join();
}

/// Runs every (model, channel, snr, seed) cell. Rows are written to `csv`
/// (if given) in grid order, each as soon as it and all earlier rows exist.
/// A failing cell yields a flagged row; the grid continues.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* csv = nullptr) {
    cfg.validate();
    const std::size_t n_seeds = cfg.seeds.size();
    const std::size_t n_models = cfg.models.size();

    struct SeedState {
        std::optional<ExperimentData> data;
        std::optional<ClassifierModel> clf;
        std::optional<std::size_t> ap_clusters;
        std::string error;
    };
    std::vector<SeedState> seeds(n_seeds);
    parallel_for(n_seeds, cfg.jobs, [&](std::size_t s) {
        try {
            auto& st = seeds[s];
            st.data = load_experiment_data(cfg, cfg.seeds[s]);
            auto clf = build_classifier(st.data->train.dim(), std::max<std::uint32_t>(2, st.data->train.n_class),
                                        cfg.seeds[s]);
            TrainConfig tc = cfg.classifier;
            tc.seed = cfg.seeds[s];
            train_classifier(clf, st.data->train, tc);
            st.clf = std::move(clf);
        } catch (const std::exception& e) {
            seeds[s].error = e.what();
        }
    });

    // sem_comp runs before vqae within a seed so the learned codebook can reuse its K.
    struct Built {
        std::optional<BuiltModel> model;
        std::string error;
        double noiseless_accuracy = 0.0;
        std::uint64_t noiseless_bits = 0;
    };
    std::vector<Built> built(n_seeds * n_models);
    parallel_for(n_seeds, cfg.jobs, [&](std::size_t s) {
        std::vector<std::size_t> order(n_models);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return (cfg.models[a] == ModelKind::sem_comp) > (cfg.models[b] == ModelKind::sem_comp);
        });
        for (auto mi : order) {
            auto& b = built[s * n_models + mi];
            if (!seeds[s].error.empty()) {
                b.error = seeds[s].error;
                continue;
            }
            try {
                b.model = build_model(cfg.models[mi], cfg, *seeds[s].data, cfg.seeds[s], seeds[s].ap_clusters);
                ChannelConfig clean{ChannelKind::awgn, std::numeric_limits<double>::infinity(), cfg.seeds[s], 0.0};
                const auto o = communicate(*b.model, *seeds[s].clf, *seeds[s].data, clean);
                b.noiseless_accuracy = double(o.correct) / double(seeds[s].data->test.size());
                b.noiseless_bits = o.bits_total;
            } catch (const std::exception& e) {
                b.error = e.what();
            }
        }
    });

    const std::size_t n_ch = cfg.channels.size(), n_snr = cfg.snr_db.size();
    const std::size_t n_cells = n_models * n_ch * n_snr * n_seeds;
    std::vector<std::optional<RunReport>> rows(n_cells);
    std::mutex write_mutex;
    std::size_t next_to_write = 0;
    if (csv) *csv << csv_header() << '\n' << std::flush;

    parallel_for(n_cells, cfg.jobs, [&](std::size_t cell) {
        const std::size_t s = cell % n_seeds;
        const std::size_t k = (cell / n_seeds) % n_snr;
        const std::size_t c = (cell / (n_seeds * n_snr)) % n_ch;
        const std::size_t m = cell / (n_seeds * n_snr * n_ch);
        RunReport r;
        r.model = to_string(cfg.models[m]);
        r.channel = to_string(cfg.channels[c]);
        r.snr_db = cfg.snr_db[k];
        r.seed = cfg.seeds[s];
        r.time_budget_s = cfg.time_budget_s;
        const auto& b = built[s * n_models + m];
        try {
            if (!b.model) throw std::runtime_error(b.error);
            const auto& data = *seeds[s].data;
            r.n_messages = data.test.size();
            ChannelConfig ch{cfg.channels[c], cfg.snr_db[k], cfg.seeds[s], cfg.inversion_clip};
            // Distinct noise per (channel, snr) cell for the same seed.
            ch.seed = splitmix64(cfg.seeds[s] * 1000003ull + c * 7919ull + k);
            const auto o = communicate(*b.model, *seeds[s].clf, data, ch);
            r.bits_total = o.bits_total;
            r.accuracy = double(o.correct) / double(r.n_messages);
            r.t_train_s = b.model->t_train_s;
            r.u_cps = cfg.deterministic_time
                          ? measure_throughput(o.correct, r.n_messages, cfg.det.communication_s(r.n_messages))
                          : measure_throughput(o.correct, r.n_messages, o.elapsed_s);
            r.finalize();
            for (const auto& n : b.model->notes) r.add_flag(n);
            if (o.link.decode_failures) r.add_flag("decode_failures=" + std::to_string(o.link.decode_failures));
            if (cfg.models[m] == ModelKind::huffman_baseline) r.add_flag("source_only");
        } catch (const std::exception& e) {
            r.accuracy = r.u_cps = r.eta_t = 0.0;
            r.add_flag(std::string("error=") + e.what());
        }
        std::lock_guard lock(write_mutex);
        rows[cell] = std::move(r);
        while (next_to_write < n_cells && rows[next_to_write]) {
            if (csv) *csv << to_csv_row(*rows[next_to_write]) << '\n' << std::flush;
            ++next_to_write;
        }
    });

    ExperimentResult res;
    for (auto& r : rows) {
        for (const auto& f : r->flags)
            if (f.rfind("error=", 0) == 0) res.all_ok = false;
        res.rows.push_back(std::move(*r));
    }
    for (std::size_t m = 0; m < n_models; ++m) {
        Table2Row t;
        t.model = to_string(cfg.models[m]);
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const auto& b = built[s * n_models + m];
            if (!b.model) continue;
            t.bits_total += double(b.noiseless_bits);
            t.accuracy += b.noiseless_accuracy;
            t.codewords += double(b.model->codewords);
            ++t.seeds;
        }
        if (t.seeds) {
            t.bits_total /= double(t.seeds);
            t.accuracy /= double(t.seeds);
            t.codewords /= double(t.seeds);
        }
        res.table2.push_back(t);
    }
    std::size_t clean_seeds = 0;
    for (const auto& st : seeds)
        if (st.clf) {
            res.clean_accuracy += classification_accuracy(*st.clf, st.data->test);
            ++clean_seeds;
        } else {
            res.all_ok = false;
        }
    if (clean_seeds) res.clean_accuracy /= double(clean_seeds);
    return res;
}

// ---------------------------------------------------------------------------
// Reports

inline void write_table2(std::ostream& os, const ExperimentResult& res) {
    os << std::left << std::setw(18) << "model" << std::right << std::setw(14) << "codewords" << std::setw(14)
       << "bits" << std::setw(12) << "acc(%)" << '\n';
    os << std::left << std::setw(18) << "clean" << std::right << std::setw(14) << "-" << std::setw(14) << "-"
       << std::setw(12) << std::fixed << std::setprecision(2) << 100.0 * res.clean_accuracy << '\n';
    for (const auto& t : res.table2) {
        os << std::left << std::setw(18) << t.model << std::right << std::setw(14) << std::setprecision(1)
           << t.codewords << std::setw(14) << std::setprecision(0) << t.bits_total << std::setw(12)
           << std::setprecision(2) << 100.0 * t.accuracy << '\n';
    }
    os.unsetf(std::ios::fixed);
}

inline std::vector<RunReport> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != csv_header()) throw FormatError("unexpected CSV header: " + line);
    std::vector<RunReport> rows;
    while (std::getline(is, line))
        if (!line.empty()) rows.push_back(parse_csv_row(line));
    return rows;
}

/// Aligned text table of every row.
inline void write_table_report(std::ostream& os, const std::vector<RunReport>& rows) {
    os << std::left << std::setw(18) << "model" << std::setw(19) << "channel" << std::right << std::setw(8) << "snr_db"
       << std::setw(6) << "seed" << std::setw(10) << "bits" << std::setw(9) << "acc" << std::setw(12) << "t_train_s"
       << std::setw(12) << "u_cps" << std::setw(13) << "eta_t" << "  flags\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(18) << r.model << std::setw(19) << r.channel << std::right << std::fixed
           << std::setprecision(1) << std::setw(8) << r.snr_db << std::setw(6) << r.seed << std::setw(10)
           << r.bits_total << std::setprecision(4) << std::setw(9) << r.accuracy << std::setprecision(3)
           << std::setw(12) << r.t_train_s << std::setprecision(1) << std::setw(12) << r.u_cps << std::setw(13)
           << r.eta_t << "  ";
        for (std::size_t i = 0; i < r.flags.size(); ++i) os << (i ? ";" : "") << r.flags[i];
        os << '\n';
    }
    os.unsetf(std::ios::fixed);
}

/// Plot columns: one block per channel, rows by snr_db, one eta_t column per
/// model (mean over seeds); blocks separated by blank lines.
inline void write_fig_report(std::ostream& os, const std::vector<RunReport>& rows) {
    std::vector<std::string> channels, models;
    std::set<double> snrs;
    std::map<std::tuple<std::string, std::string, double>, std::pair<double, std::size_t>> acc;
    for (const auto& r : rows) {
        if (std::find(channels.begin(), channels.end(), r.channel) == channels.end()) channels.push_back(r.channel);
        if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
        snrs.insert(r.snr_db);
        auto& cell = acc[{r.channel, r.model, r.snr_db}];
        cell.first += r.eta_t;
        ++cell.second;
    }
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (c) os << "\n\n";
        os << "# channel " << channels[c] << "\n# snr_db";
        for (const auto& m : models) os << ' ' << m;
        os << '\n';
        for (double snr : snrs) {
            os << format_real(snr);
            for (const auto& m : models) {
                const auto it = acc.find({channels[c], m, snr});
                os << ' ' << (it == acc.end() ? std::string("nan") : format_real(it->second.first / double(it->second.second)));
            }
            os << '\n';
        }
    }
}

}  // namespace semcom
