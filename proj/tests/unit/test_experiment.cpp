#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "semcom/experiment.hpp"

using namespace semcom;

namespace {

// Small enough for a unit test, large enough for the 100-message throughput floor.
const char* kSmall = R"(
synth_classes = 4
synth_dim = 16
synth_spread = 0.1
synth_codebook_size = 80
synth_train_size = 200
synth_test_size = 120
vqae_latent_dim = 4
vqae_epochs = 2
clf_epochs = 4
deterministic_time = true
)";

ExperimentConfig small(const std::string& extra) { return parse_config_text(std::string(kSmall) + extra, "small"); }

std::string error_of(const std::string& text) {
    try {
        parse_config_text(text, "cfg");
    } catch (const UsageError& e) {
        return e.what();
    }
    return "";
}

std::string csv_of(const ExperimentConfig& cfg) {
    std::ostringstream os;
    run_experiment(cfg, &os);
    return os.str();
}

}  // namespace

TEST(Config, MinimalConfigFillsDefaults) {
    const auto cfg = parse_config_text("models = sem_quan\n");
    ASSERT_EQ(cfg.models.size(), 1u);
    EXPECT_EQ(cfg.classifier.batch_size, 128u);
    EXPECT_EQ(cfg.classifier.adam_beta1, 0.9);
    EXPECT_EQ(cfg.classifier.adam_beta2, 0.999);
    EXPECT_EQ(cfg.classifier.initial_lr, 0.001);
    EXPECT_EQ(cfg.vqae.train.batch_size, 128u);
    EXPECT_EQ(cfg.ap.damping, 0.5);
    EXPECT_EQ(cfg.time_budget_s, 100.0);
    EXPECT_EQ(cfg.snr_db, (std::vector<double>{0, 5, 10, 15}));
    EXPECT_TRUE(cfg.synthetic_data());
    EXPECT_FALSE(cfg.deterministic_time);
}

TEST(Config, ListsCommentsAndAliases) {
    const auto cfg = parse_config_text(
        "# grid\nmodels = sem_quan, huffman  # trailing\nsnr_db = 0,5,10,15\nseeds=1,2,3\n"
        "channels = awgn,rayleigh_inverted\nap_preference = -3.5\nvqae_codebook_size = 63\n");
    EXPECT_EQ(cfg.models, (std::vector<ModelKind>{ModelKind::sem_quan, ModelKind::huffman_baseline}));
    EXPECT_EQ(cfg.snr_db.size(), 4u);
    EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
    EXPECT_EQ(cfg.channels.size(), 2u);
    EXPECT_EQ(cfg.ap.preference.kind, Preference::Kind::value);
    EXPECT_EQ(cfg.ap.preference.value, -3.5);
    EXPECT_FALSE(cfg.vqae_codebook_auto);
    EXPECT_EQ(cfg.vqae.codebook_size, 63u);
}

TEST(Config, PresetsAreOverridable) {
    const auto cfg = parse_config_text("synth_dim = 32\nmodels = vqae\npreset = agnews-like\n");
    EXPECT_EQ(cfg.synthetic.codebook_size, 10000u);
    EXPECT_EQ(cfg.synthetic.test_size, 2000u);
    EXPECT_EQ(cfg.synthetic.dim, 32u);
    EXPECT_EQ(cfg.vqae.latent_dim, 64u);
    const auto stl = parse_config_text("preset = stl10-like\nmodels = vqae\n");
    EXPECT_EQ(stl.synthetic.n_class, 10u);
    EXPECT_EQ(stl.synthetic.codebook_size, 1000u);
}

TEST(Config, MisspelledKeyNamesItsLine) {
    const auto e = error_of("models = sem_quan\n# comment\nbacth_size = 64\n");
    EXPECT_NE(e.find("cfg:3"), std::string::npos) << e;
    EXPECT_NE(e.find("bacth_size"), std::string::npos) << e;
}

TEST(Config, Errors) {
    EXPECT_NE(error_of("snr_db = 0\n").find("missing required key 'models'"), std::string::npos);
    EXPECT_NE(error_of("models = sem_quan\nbatch_size = many\n").find("cfg:2: bad value for 'batch_size'"),
              std::string::npos);
    EXPECT_NE(error_of("models = jpeg\n").find("cfg:1"), std::string::npos);
    EXPECT_NE(error_of("models = vqae\nmodels = vqae\n").find("duplicate"), std::string::npos);
    EXPECT_NE(error_of("models = vqae\njust words\n").find("cfg:2"), std::string::npos);
    EXPECT_NE(error_of("models = vqae\ncodebook_path = /nope/a\ntrain_path = /nope/b\ntest_path = /nope/c\n")
                  .find("does not exist"),
              std::string::npos);
    EXPECT_NE(error_of("models = vqae\nseeds =\n").find("seeds"), std::string::npos);
    EXPECT_THROW(parse_config("/nonexistent/config.cfg"), UsageError);
}

TEST(Experiment, FullGridRowCount) {
    auto cfg = small("models = sem_quan,sem_comp,vqae,huffman_baseline\nchannels = awgn,rayleigh_inverted\n"
                     "snr_db = 0,5,10,15\nseeds = 1,2,3\njobs = 4\n");
    std::ostringstream os;
    const auto res = run_experiment(cfg, &os);
    EXPECT_TRUE(res.all_ok);
    EXPECT_EQ(res.rows.size(), 96u);
    std::istringstream in(os.str());
    const auto rows = read_csv(in);
    EXPECT_EQ(rows.size(), 96u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.eta_t, (r.time_budget_s - r.t_train_s) * r.u_cps);
        for (const auto& f : r.flags) EXPECT_NE(f.rfind("error=", 0), 0u) << f;
    }
    ASSERT_EQ(res.table2.size(), 4u);
    EXPECT_EQ(res.table2[3].model, "huffman_baseline");
    EXPECT_GT(res.table2[3].bits_total, res.table2[0].bits_total);
}

TEST(Experiment, DeterministicModeIsReproducible) {
    auto cfg = small("models = sem_quan,sem_comp,vqae\nsnr_db = 0,10\nseeds = 4,5\n");
    cfg.jobs = 1;
    const auto a = csv_of(cfg);
    cfg.jobs = 3;
    EXPECT_EQ(a, csv_of(cfg));
}

TEST(Experiment, SemQuanNoiselessComposition) {
    auto cfg = small("models = sem_quan\nsnr_db = inf\n");
    const auto res = run_experiment(cfg);
    ASSERT_EQ(res.rows.size(), 1u);
    const auto& r = res.rows[0];
    EXPECT_EQ(r.bits_total, r.n_messages * index_bit_width(cfg.synthetic.codebook_size));
    EXPECT_EQ(r.t_train_s, 0.0);

    // Independently: clean classifier on the quantized test points.
    const auto data = load_experiment_data(cfg, 1);
    auto clf = build_classifier(data.train.dim(), data.train.n_class, 1);
    TrainConfig tc = cfg.classifier;
    tc.seed = 1;
    train_classifier(clf, data.train, tc);
    const auto cb = build_identity_codebook(data.codebook);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < data.test.size(); ++i)
        ok += classify(clf, reconstruct(cb, assign_index(cb, data.test.row(i)).index)) == data.test.labels[i];
    EXPECT_DOUBLE_EQ(r.accuracy, double(ok) / double(data.test.size()));
    EXPECT_DOUBLE_EQ(res.table2[0].accuracy, r.accuracy);
}

TEST(Experiment, DeterministicEtaOrdering) {
    auto cfg = small("models = sem_quan,vqae\nsnr_db = 0,5,10,15\n");
    const auto res = run_experiment(cfg);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& q = res.rows[k];
        const auto& v = res.rows[4 + k];
        ASSERT_EQ(q.snr_db, v.snr_db);
        EXPECT_DOUBLE_EQ(q.t_train_s, 0.0);
        EXPECT_GT(v.t_train_s, 0.0);
        EXPECT_DOUBLE_EQ(v.t_train_s, cfg.vqae.train.epochs * cfg.synthetic.codebook_size * 1e-3);
        EXPECT_DOUBLE_EQ(q.u_cps, q.accuracy * q.n_messages / (q.n_messages * 1e-3));
    }
}

TEST(Experiment, AdversarialConfigsCompleteWithFlags) {
    // Latent larger than the embedding, two-point codebook, very low SNR.
    auto cfg = small("models = sem_quan,sem_comp,vqae\nsnr_db = -20\n");
    cfg.vqae.latent_dim = 40;
    cfg.synthetic.codebook_size = 2;
    ExperimentResult res;
    ASSERT_NO_THROW(res = run_experiment(cfg));
    ASSERT_EQ(res.rows.size(), 3u);
    EXPECT_FALSE(res.all_ok);
    bool vqae_flagged = false;
    for (const auto& f : res.rows[2].flags) vqae_flagged |= f.rfind("error=", 0) == 0;
    EXPECT_TRUE(vqae_flagged);
    EXPECT_EQ(res.rows[2].eta_t, 0.0);
    // The memory models still ran at -20 dB.
    EXPECT_EQ(res.rows[0].bits_total, res.rows[0].n_messages * 1u);
}

TEST(Experiment, HuffmanNeedsTexts) {
    const auto d = ExperimentData{};
    ExperimentConfig cfg;
    std::optional<std::size_t> k;
    EXPECT_THROW(build_model(ModelKind::huffman_baseline, cfg, d, 1, k), UsageError);
}

TEST(Reports, FigureColumns) {
    std::vector<RunReport> rows;
    for (std::string ch : {"awgn", "rayleigh_inverted"})
        for (std::string m : {"sem_quan", "vqae"})
            for (double snr : {0.0, 5.0})
                for (std::uint64_t seed : {1, 2}) {
                    RunReport r;
                    r.model = m;
                    r.channel = ch;
                    r.snr_db = snr;
                    r.seed = seed;
                    r.eta_t = (m == "vqae" ? 10.0 : 100.0) + snr + double(seed);
                    rows.push_back(r);
                }
    std::ostringstream os;
    write_fig_report(os, rows);
    EXPECT_EQ(os.str(),
              "# channel awgn\n# snr_db sem_quan vqae\n0 101.5 11.5\n5 106.5 16.5\n\n\n"
              "# channel rayleigh_inverted\n# snr_db sem_quan vqae\n0 101.5 11.5\n5 106.5 16.5\n");
}

TEST(Reports, ReadCsvChecksHeader) {
    std::istringstream bad("model,channel\n");
    EXPECT_THROW(read_csv(bad), FormatError);
    std::istringstream empty("");
    EXPECT_THROW(read_csv(empty), FormatError);
}

TEST(Reports, Table2Layout) {
    ExperimentResult res;
    res.clean_accuracy = 0.9;
    res.table2.push_back({"sem_quan", 20000, 0.85, 1000, 3});
    std::ostringstream os;
    write_table2(os, res);
    const auto s = os.str();
    EXPECT_NE(s.find("clean"), std::string::npos);
    EXPECT_NE(s.find("90.00"), std::string::npos);
    EXPECT_NE(s.find("20000"), std::string::npos);
    EXPECT_NE(s.find("85.00"), std::string::npos);
}
