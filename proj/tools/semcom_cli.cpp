// semcom: command-line front end for the semantic link simulator.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "semcom/semcom.hpp"

namespace {

int run_gen(std::uint32_t classes, std::size_t per_class, std::size_t dim, double spread, std::uint64_t seed,
            const std::string& out) {
    const auto ds = semcom::generate_synthetic(classes, per_class, dim, spread, seed);
    semcom::save_dataset(ds, out);
    std::cout << "wrote " << ds.size() << " x " << ds.dim() << " embeddings (" << ds.n_class << " classes) to " << out
              << '\n';
    return 0;
}

int run_codebook(const std::string& kind, const std::string& data_path, const std::string& out, std::uint64_t seed,
                 const semcom::APConfig& ap, semcom::VqaeConfig vq) {
    const auto ds = semcom::load_dataset(data_path);
    if (kind == "identity") {
        const auto cb = semcom::build_identity_codebook(ds);
        semcom::save_codebook(cb, out);
        std::cout << "identity codebook: " << cb.size() << " entries, " << cb.bit_width() << " bits/index\n";
    } else if (kind == "ap") {
        const auto ap_res = semcom::run_affinity(ds, ap, seed);
        const auto cb = semcom::build_centroid_codebook(ds, ap_res);
        semcom::save_codebook(cb, out);
        std::cout << ap_res << '\n' << "bits/index " << cb.bit_width() << '\n';
    } else if (kind == "vqae") {
        vq.train.seed = seed;
        const auto res = semcom::train_vqae(ds, vq);
        semcom::save_codebook(semcom::latent_codebook(res.model), out);
        semcom::save_net(res.model.encoder, out + ".enc.snet");
        semcom::save_net(res.model.decoder, out + ".dec.snet");
        std::cout << "vqae codebook: " << res.model.codebook_size() << " codes, latent " << res.model.latent_dim
                  << ", dead " << res.dead_codes << ", t_train_s " << res.t_train_s << '\n';
    } else {
        throw semcom::UsageError("codebook kind must be identity, ap or vqae");
    }
    return 0;
}

int run_train_classifier(const std::string& train_path, const std::string& out, semcom::TrainConfig cfg,
                         std::uint64_t seed) {
    const auto ds = semcom::load_dataset(train_path);
    auto clf = semcom::build_classifier(ds.dim(), std::max<std::uint32_t>(2, ds.n_class), seed);
    cfg.seed = seed;
    const auto stats = semcom::train_classifier(clf, ds, cfg);
    semcom::save_net(clf.net, out);
    std::cout << "final loss " << stats.epoch_loss.back() << ", train accuracy "
              << semcom::classification_accuracy(clf, ds) << ", t_train_s " << stats.t_train_s << '\n';
    return 0;
}

int run_simulate(const std::string& config_path, const std::vector<std::uint64_t>& seeds, std::size_t jobs,
                 bool deterministic, const std::string& out) {
    auto cfg = semcom::parse_config(config_path);
    if (!seeds.empty()) cfg.seeds = seeds;
    if (jobs) cfg.jobs = jobs;
    if (deterministic) cfg.deterministic_time = true;

    std::ofstream csv_file;
    std::ostream* csv = &std::cout;
    if (!out.empty()) {
        csv_file.open(out);
        if (!csv_file) throw semcom::UsageError("cannot write '" + out + "'");
        csv = &csv_file;
    }
    const auto res = semcom::run_experiment(cfg, csv);
    if (!out.empty()) {
        std::ofstream t2(out + ".table2.txt");
        semcom::write_table2(t2, res);
        semcom::write_table2(std::cerr, res);
    }
    for (const auto& r : res.rows)
        for (const auto& f : r.flags)
            if (f.rfind("error=", 0) == 0)
                std::cerr << "cell " << r.model << '/' << r.channel << '/' << r.snr_db << '/' << r.seed << ": " << f
                          << '\n';
    return res.all_ok ? 0 : 1;
}

int run_report(const std::string& in_path, const std::string& format, const std::string& out) {
    std::ifstream in(in_path);
    if (!in) throw semcom::UsageError("cannot open '" + in_path + "'");
    const auto rows = semcom::read_csv(in);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw semcom::UsageError("cannot write '" + out + "'");
        os = &file;
    }
    if (format == "table")
        semcom::write_table_report(*os, rows);
    else if (format == "fig")
        semcom::write_fig_report(*os, rows);
    else
        throw semcom::UsageError("report format must be table or fig");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task-oriented semantic communication link simulator"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled embedding dataset (SEMB)");
    std::uint32_t classes = 4;
    std::size_t per_class = 250, dim = 64;
    double spread = 0.1;
    std::uint64_t seed = 1;
    std::string out;
    gen->add_option("--classes", classes, "Number of classes")->capture_default_str();
    gen->add_option("--per-class", per_class, "Samples per class")->capture_default_str();
    gen->add_option("--dim", dim, "Embedding dimension p")->capture_default_str();
    gen->add_option("--spread", spread, "Per-coordinate standard deviation")->capture_default_str();
    gen->add_option("--seed", seed, "Random seed")->capture_default_str();
    gen->add_option("--out", out, "Output .semb path")->required();

    auto* cbk = app.add_subcommand("codebook", "Build a codebook from a dataset");
    std::string kind, data_path;
    semcom::APConfig ap;
    double preference = std::numeric_limits<double>::quiet_NaN();
    semcom::VqaeConfig vq = semcom::VqaeConfig::stl10_like();
    cbk->add_option("kind", kind, "identity | ap | vqae")->required()->check(CLI::IsMember({"identity", "ap", "vqae"}));
    cbk->add_option("--data", data_path, "Input .semb dataset")->required()->check(CLI::ExistingFile);
    cbk->add_option("--out", out, "Output .scbk path")->required();
    cbk->add_option("--seed", seed, "Random seed")->capture_default_str();
    cbk->add_option("--damping", ap.damping, "AP damping")->capture_default_str();
    cbk->add_option("--max-iterations", ap.max_iterations, "AP iteration cap")->capture_default_str();
    cbk->add_option("--convergence-window", ap.convergence_window, "AP stability window")->capture_default_str();
    cbk->add_option("--preference", preference, "AP preference (default: median similarity)");
    cbk->add_option("--latent-dim", vq.latent_dim, "VQ-AE latent dimension")->capture_default_str();
    cbk->add_option("--codebook-size", vq.codebook_size, "VQ-AE codebook size")->capture_default_str();
    cbk->add_option("--alpha", vq.alpha, "VQ-AE layer scaling factor")->capture_default_str();
    cbk->add_option("--epochs", vq.train.epochs, "VQ-AE epochs")->capture_default_str();
    cbk->add_option("--lr", vq.train.initial_lr, "VQ-AE initial learning rate")->capture_default_str();

    auto* tc = app.add_subcommand("train-classifier", "Train the downstream classifier and save it (SNET)");
    std::string train_path;
    semcom::TrainConfig clf_cfg;
    tc->add_option("--train", train_path, "Training .semb dataset")->required()->check(CLI::ExistingFile);
    tc->add_option("--out", out, "Output .snet path")->required();
    tc->add_option("--seed", seed, "Random seed")->capture_default_str();
    tc->add_option("--epochs", clf_cfg.epochs, "Epochs")->capture_default_str();
    tc->add_option("--lr", clf_cfg.initial_lr, "Initial learning rate")->capture_default_str();
    tc->add_option("--batch-size", clf_cfg.batch_size, "Minibatch size")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "Run the experiment grid and emit CSV");
    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::size_t jobs = 0;
    bool deterministic = false;
    sim->add_option("--config", config_path, "Experiment config (key = value)")->required()->check(CLI::ExistingFile);
    sim->add_option("--seed", seeds, "Seed(s); replaces the config's seeds list");
    sim->add_option("--jobs", jobs, "Parallel workers (default: config value)");
    sim->add_flag("--deterministic-time", deterministic, "Replace wall-clock with the fixed per-sample cost model");
    sim->add_option("--out", out, "CSV output path (default: stdout)");

    auto* rep = app.add_subcommand("report", "Summarize a run CSV");
    std::string in_path, format = "table";
    rep->add_option("--in", in_path, "Run CSV")->required()->check(CLI::ExistingFile);
    rep->add_option("--format", format, "table | fig")->capture_default_str()->check(CLI::IsMember({"table", "fig"}));
    std::string rep_out;
    std::uint64_t rep_seed = 0;
    rep->add_option("--out", rep_out, "Output path (default: stdout)");
    // Reports are deterministic; accepted so every subcommand takes --seed.
    rep->add_option("--seed", rep_seed, "Ignored");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return run_gen(classes, per_class, dim, spread, seed, out);
        if (*cbk) {
            if (!std::isnan(preference)) ap.preference = semcom::Preference::fixed(preference);
            return run_codebook(kind, data_path, out, seed, ap, vq);
        }
        if (*tc) return run_train_classifier(train_path, out, clf_cfg, seed);
        if (*sim) return run_simulate(config_path, seeds, jobs, deterministic, out);
        if (*rep) return run_report(in_path, format, rep_out);
    } catch (const semcom::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
