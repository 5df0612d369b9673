#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ergsyn/cgan.hpp"
#include "ergsyn/dataset.hpp"
#include "ergsyn/errors.hpp"
#include "ergsyn/eval.hpp"
#include "ergsyn/filter.hpp"
#include "ergsyn/plot.hpp"
#include "ergsyn/tst.hpp"
#include "ergsyn/vit.hpp"
#include "ergsyn/wavelet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

json default_config() {
    return json{
        {"seed", 42},
        {"output_dir", "run"},
        {"dataset",
         {{"csv", ""},
          {"oracle",
           {{"n_per_cell", 40},
            {"strength_indices", json::array({0, 1, 2, 3, 4, 5, 6, 7, 8})},
            {"reference_counts", false},
            {"noise_std", 5.0},
            {"a_amplitude", 35.0},
            {"a_time", 55.0},
            {"a_width", 9.0},
            {"b_amplitude", 110.0},
            {"b_time", 95.0},
            {"b_width", 18.0},
            {"op_amplitude", 9.0},
            {"op_frequency", 0.11},
            {"op_damping", 0.05},
            {"asd_b_amplitude_factor", 0.85},
            {"asd_b_time_shift", 6.0},
            {"strength_decay", 0.0625}}}}},
        {"split", {{"test_fraction", 0.25}, {"folds", 5}, {"by_subject", false}}},
        {"gan",
         {{"hidden", 512},
          {"epochs", 10000},
          {"batch", 15},
          {"lr", 0.0002},
          {"dropout", 0.2},
          {"leaky_slope", 0.2},
          {"adam_beta1", 0.5},
          {"adam_beta2", 0.999},
          {"checkpoint_every", 500},
          {"holdback_fraction", 0.1}}},
        {"tst",
         {{"width", 64},
          {"heads", 4},
          {"layers", 3},
          {"ff", 128},
          {"dropout", 0.1},
          {"positional", "sinusoidal"},
          {"batch", 32},
          {"lr", 0.0001},
          {"max_epochs", 300},
          {"patience", 10}}},
        {"vit",
         {{"image", 64},
          {"patch", 8},
          {"width", 64},
          {"heads", 4},
          {"layers", 3},
          {"ff", 128},
          {"dropout", 0.1},
          {"batch", 32},
          {"lr", 0.0001},
          {"max_epochs", 300},
          {"patience", 10}}},
        {"generate",
         {{"n_per_cell", 100},
          {"butterworth",
           {{"enabled", true}, {"order", 4}, {"cutoff", 0.2}, {"zero_phase", true}}}}},
        {"train_clf", {{"models", json::array({"TST"})}}},
        {"evaluate",
         {{"models", json::array({"TST"})},
          {"per_strength_rows", true},
          {"n_synthetic_per_cell", -1},
          {"strength_indices", json::array()}}},
        {"plot", {{"n_real", 5}, {"n_synthetic", 5}}},
    };
}

void reject_unknown_keys(const json& user, const json& defaults, const std::string& prefix) {
    if (!user.is_object()) return;
    for (const auto& [key, value] : user.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!defaults.contains(key))
            throw ergsyn::ConfigError("unknown configuration key: " + path);
        if (defaults.at(key).is_object()) {
            if (!value.is_object())
                throw ergsyn::ConfigError("configuration key " + path + " must be an object");
            reject_unknown_keys(value, defaults.at(key), path);
        }
    }
}

void merge_into(json& base, const json& user) {
    for (const auto& [key, value] : user.items()) {
        if (value.is_object() && base.contains(key) && base.at(key).is_object())
            merge_into(base.at(key), value);
        else
            base[key] = value;
    }
}

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<int> gan_epochs;
    std::optional<int> gan_hidden;
    std::optional<int> gan_batch;
    std::optional<int> oracle_n_per_cell;
    std::optional<int> n_synthetic;
};

json load_config(const std::string& path, const CliOverrides& over) {
    json cfg = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ergsyn::ConfigError("cannot open config file: " + path);
        json user;
        try {
            in >> user;
        } catch (const json::parse_error& e) {
            throw ergsyn::ConfigError("config parse error in " + path + ": " + e.what());
        }
        reject_unknown_keys(user, cfg, "");
        merge_into(cfg, user);
    }
    if (over.seed) cfg["seed"] = *over.seed;
    if (over.output_dir) cfg["output_dir"] = *over.output_dir;
    if (over.gan_epochs) cfg["gan"]["epochs"] = *over.gan_epochs;
    if (over.gan_hidden) cfg["gan"]["hidden"] = *over.gan_hidden;
    if (over.gan_batch) cfg["gan"]["batch"] = *over.gan_batch;
    if (over.oracle_n_per_cell) cfg["dataset"]["oracle"]["n_per_cell"] = *over.oracle_n_per_cell;
    if (over.n_synthetic) cfg["evaluate"]["n_synthetic_per_cell"] = *over.n_synthetic;
    return cfg;
}

fs::path resolve_output_dir(const json& cfg) {
    fs::path dir = cfg.at("output_dir").get<std::string>();
    if (const char* root = std::getenv("ERGSYN_OUTPUT_ROOT"); root && *root && dir.is_relative())
        dir = fs::path(root) / dir;
    fs::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------------
// Config block -> module structs
// ---------------------------------------------------------------------------

ergsyn::OracleParams oracle_params(const json& o) {
    ergsyn::OracleParams p;
    p.noise_std = o.at("noise_std");
    p.a_amplitude = o.at("a_amplitude");
    p.a_time = o.at("a_time");
    p.a_width = o.at("a_width");
    p.b_amplitude = o.at("b_amplitude");
    p.b_time = o.at("b_time");
    p.b_width = o.at("b_width");
    p.op_amplitude = o.at("op_amplitude");
    p.op_frequency = o.at("op_frequency");
    p.op_damping = o.at("op_damping");
    p.asd_b_amplitude_factor = o.at("asd_b_amplitude_factor");
    p.asd_b_time_shift = o.at("asd_b_time_shift");
    p.strength_decay = o.at("strength_decay");
    return p;
}

ergsyn::SplitPlan split_plan(const json& cfg) {
    ergsyn::SplitPlan plan;
    plan.test_fraction = cfg.at("split").at("test_fraction");
    plan.folds = cfg.at("split").at("folds");
    plan.seed = cfg.at("seed").get<std::uint64_t>();
    return plan;
}

ergsyn::GanConfig gan_config(const json& cfg) {
    const json& g = cfg.at("gan");
    ergsyn::GanConfig c;
    c.hidden = g.at("hidden");
    c.epochs = g.at("epochs");
    c.batch = g.at("batch");
    c.lr = g.at("lr");
    c.dropout = g.at("dropout");
    c.leaky_slope = g.at("leaky_slope");
    c.adam_beta1 = g.at("adam_beta1");
    c.adam_beta2 = g.at("adam_beta2");
    c.checkpoint_every = g.at("checkpoint_every");
    c.holdback_fraction = g.at("holdback_fraction");
    c.seed = cfg.at("seed").get<std::uint64_t>();
    return c;
}

ergsyn::TstConfig tst_config(const json& cfg) {
    const json& t = cfg.at("tst");
    ergsyn::TstConfig c;
    c.width = t.at("width");
    c.heads = t.at("heads");
    c.layers = t.at("layers");
    c.ff = t.at("ff");
    c.dropout = t.at("dropout");
    const std::string pos = t.at("positional");
    if (pos == "sinusoidal") c.positional = ergsyn::TstConfig::Positional::Sinusoidal;
    else if (pos == "learned") c.positional = ergsyn::TstConfig::Positional::Learned;
    else if (pos == "none") c.positional = ergsyn::TstConfig::Positional::None;
    else throw ergsyn::ConfigError("tst.positional must be sinusoidal, learned or none");
    c.batch = t.at("batch");
    c.lr = t.at("lr");
    c.max_epochs = t.at("max_epochs");
    c.patience = t.at("patience");
    c.seed = cfg.at("seed").get<std::uint64_t>();
    return c;
}

ergsyn::VitConfig vit_config(const json& cfg) {
    const json& v = cfg.at("vit");
    ergsyn::VitConfig c;
    c.image = v.at("image");
    c.patch = v.at("patch");
    c.width = v.at("width");
    c.heads = v.at("heads");
    c.layers = v.at("layers");
    c.ff = v.at("ff");
    c.dropout = v.at("dropout");
    c.batch = v.at("batch");
    c.lr = v.at("lr");
    c.max_epochs = v.at("max_epochs");
    c.patience = v.at("patience");
    c.seed = cfg.at("seed").get<std::uint64_t>();
    return c;
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fs::path dataset_path(const json& cfg, const fs::path& outdir) {
    const std::string csv = cfg.at("dataset").at("csv");
    if (!csv.empty()) return csv;
    return outdir / "dataset.csv";
}

ergsyn::Dataset load_input_dataset(const json& cfg, const fs::path& outdir) {
    const fs::path path = dataset_path(cfg, outdir);
    if (!fs::exists(path))
        throw ergsyn::DataError("dataset file not found: " + path.string() +
                                " (produce it with `ergsyn simulate` or set dataset.csv)");
    return ergsyn::load_dataset_csv(path);
}

std::uint64_t file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = ergsyn::fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

void write_manifest(const fs::path& outdir, const std::string& command, const json& cfg,
                    const std::vector<fs::path>& inputs) {
    json m;
    m["command"] = command;
    m["config_hash"] = ergsyn::fnv1a64(cfg.dump());
    json files = json::object();
    for (const auto& p : inputs)
        if (fs::exists(p)) files[p.string()] = file_hash(p);
    m["inputs"] = files;
    std::ofstream out(outdir / ("manifest-" + command + ".json"), std::ios::binary);
    out << m.dump(2) << "\n";
}

void print_manifest(const ergsyn::Dataset& d) {
    std::cout << "records: " << d.size() << "\n";
    for (const auto& [cell, count] : d.manifest())
        std::cout << "  " << cell.to_string() << ": " << count << "\n";
    for (const auto& [prov, count] : d.provenance_counts())
        std::cout << "  provenance " << ergsyn::to_string(prov) << ": " << count << "\n";
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_simulate(const json& cfg) {
    const fs::path outdir = resolve_output_dir(cfg);
    const json& o = cfg.at("dataset").at("oracle");
    const ergsyn::OracleParams params = oracle_params(o);
    const auto seed = cfg.at("seed").get<std::uint64_t>();

    ergsyn::Dataset d;
    if (o.at("reference_counts").get<bool>()) {
        d = ergsyn::simulate_oracle_reference_counts(params, seed);
    } else {
        std::vector<ergsyn::FlashStrength> strengths;
        for (int idx : o.at("strength_indices"))
            strengths.push_back(ergsyn::FlashStrength::from_index(idx));
        d = ergsyn::simulate_oracle_cells(params, strengths, o.at("n_per_cell"), seed);
    }

    const fs::path path = outdir / "dataset.csv";
    ergsyn::save_dataset_csv(d, path);
    std::cout << "wrote " << path.string() << "\n";
    print_manifest(d);
    write_manifest(outdir, "simulate", cfg, {path});
    return 0;
}

int cmd_train_gan(const json& cfg) {
    const fs::path outdir = resolve_output_dir(cfg);
    const ergsyn::Dataset real = load_input_dataset(cfg, outdir);
    const ergsyn::SplitPlan plan = split_plan(cfg);
    const bool by_subject = cfg.at("split").at("by_subject");
    const ergsyn::Split sp =
        by_subject ? ergsyn::subject_grouping(real, plan) : ergsyn::split(real, plan);

    const ergsyn::Dataset pool = sp.training_pool();
    std::cout << "training pool: " << pool.size() << " records, test held out: " << sp.test.size()
              << "\n";

    const ergsyn::GanConfig gc = gan_config(cfg);
    const auto hook = [&](const ergsyn::GanCheckpoint& ck, bool is_best) {
        const fs::path path = outdir / ("gan-epoch" + std::to_string(ck.epoch) + ".ckpt");
        ck.save(path);
        if (is_best) ck.save(outdir / "gan-best.ckpt");
        std::cout << "epoch " << ck.epoch << ": g_loss=" << ck.curves.g_loss.back()
                  << " d_loss=" << ck.curves.d_loss.back()
                  << " d_acc_real=" << ck.curves.d_acc_real.back()
                  << " d_acc_fake=" << ck.curves.d_acc_fake.back()
                  << (is_best ? " (best)" : "") << "\n";
    };

    try {
        const ergsyn::GanCheckpoint final = ergsyn::train_gan(pool, gc, hook);
        final.save(outdir / "gan.ckpt");
        std::cout << "wrote " << (outdir / "gan.ckpt").string() << "\n";
    } catch (const ergsyn::TrainingDivergedError& e) {
        if (e.last_checkpoint) e.last_checkpoint->save(outdir / "gan-diverged.ckpt");
        throw;
    }
    write_manifest(outdir, "train-gan", cfg, {dataset_path(cfg, outdir), outdir / "gan.ckpt"});
    return 0;
}

ergsyn::GanCheckpoint load_gan_checkpoint(const fs::path& outdir) {
    const fs::path path = outdir / "gan.ckpt";
    if (!fs::exists(path))
        throw ergsyn::DataError("GAN checkpoint not found: " + path.string() +
                                " (produce it with `ergsyn train-gan`)");
    return ergsyn::GanCheckpoint::load(path);
}

int cmd_generate(const json& cfg) {
    const fs::path outdir = resolve_output_dir(cfg);
    const ergsyn::GanCheckpoint ck = load_gan_checkpoint(outdir);
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const int n = cfg.at("generate").at("n_per_cell");

    ergsyn::Dataset synthetic =
        ergsyn::generate_synthetic(ck, n, ergsyn::fnv1a64("generate") ^ seed);

    const json& bw = cfg.at("generate").at("butterworth");
    if (bw.at("enabled").get<bool>()) {
        ergsyn::FilterSpec spec;
        spec.order = bw.at("order");
        spec.cutoff = bw.at("cutoff");
        spec.zero_phase = bw.at("zero_phase");
        for (auto& rec : synthetic.records)
            rec.samples = ergsyn::butterworth_lowpass(rec.samples, spec);
    }

    const fs::path path = outdir / "synthetic.csv";
    ergsyn::save_dataset_csv(synthetic, path);
    std::cout << "wrote " << path.string() << "\n";
    print_manifest(synthetic);
    write_manifest(outdir, "generate", cfg, {outdir / "gan.ckpt", path});
    return 0;
}

int cmd_train_clf(const json& cfg) {
    const fs::path outdir = resolve_output_dir(cfg);
    const ergsyn::Dataset real = load_input_dataset(cfg, outdir);
    const ergsyn::SplitPlan plan = split_plan(cfg);
    const bool by_subject = cfg.at("split").at("by_subject");
    const ergsyn::Split sp =
        by_subject ? ergsyn::subject_grouping(real, plan) : ergsyn::split(real, plan);

    json histories = json::object();
    for (const std::string model : cfg.at("train_clf").at("models")) {
        if (model == "TST") {
            const ergsyn::TstTrainResult r = ergsyn::tst_train(sp.folds, tst_config(cfg));
            for (std::size_t f = 0; f < r.models.size(); ++f)
                r.models[f].save(outdir / ("tst-fold" + std::to_string(f) + ".ckpt"));
            json h = json::array();
            for (const auto& fh : r.histories)
                h.push_back({{"best_epoch", fh.best_epoch},
                             {"train_loss", fh.train_loss},
                             {"val_loss", fh.val_loss}});
            histories["TST"] = h;
            std::cout << "TST: trained " << r.models.size() << " fold models\n";
        } else if (model == "ViT") {
            const ergsyn::VitConfig vc = vit_config(cfg);
            ergsyn::ScalogramCache cache(outdir / "scalogram-cache", ergsyn::default_scale_grid(),
                                         vc.image);
            const ergsyn::VitTrainResult r = ergsyn::vit_train(sp.folds, vc, cache);
            for (std::size_t f = 0; f < r.models.size(); ++f)
                r.models[f].save(outdir / ("vit-fold" + std::to_string(f) + ".ckpt"));
            json h = json::array();
            for (const auto& fh : r.histories)
                h.push_back({{"best_epoch", fh.best_epoch},
                             {"train_loss", fh.train_loss},
                             {"val_loss", fh.val_loss}});
            histories["ViT"] = h;
            std::cout << "ViT: trained " << r.models.size() << " fold models\n";
        } else {
            throw ergsyn::ConfigError("train_clf.models entries must be TST or ViT");
        }
    }
    std::ofstream hist_out(outdir / "training-history.json", std::ios::binary);
    hist_out << histories.dump(2) << "\n";
    write_manifest(outdir, "train-clf", cfg, {dataset_path(cfg, outdir)});
    return 0;
}

int cmd_evaluate(const json& cfg) {
    const fs::path outdir = resolve_output_dir(cfg);
    const ergsyn::Dataset real = load_input_dataset(cfg, outdir);
    const ergsyn::GanCheckpoint ck = load_gan_checkpoint(outdir);

    ergsyn::Table2Options options;
    options.models.clear();
    for (const std::string m : cfg.at("evaluate").at("models")) options.models.insert(m);
    options.include_per_strength_rows = cfg.at("evaluate").at("per_strength_rows");
    options.n_synthetic_per_cell = cfg.at("evaluate").at("n_synthetic_per_cell");
    for (int idx : cfg.at("evaluate").at("strength_indices"))
        options.strengths.push_back(ergsyn::FlashStrength::from_index(idx));
    options.group_by_subject = cfg.at("split").at("by_subject");
    options.tst = tst_config(cfg);
    options.vit = vit_config(cfg);
    options.cache_dir = outdir / "scalogram-cache";
    options.seed = cfg.at("seed").get<std::uint64_t>();

    const ergsyn::EvalReport report = ergsyn::run_table2(real, ck, split_plan(cfg), options);

    std::ofstream md(outdir / "report.md", std::ios::binary);
    md << report.render_markdown();
    std::ofstream kv(outdir / "report.kv", std::ios::binary);
    kv << report.serialize_kv();
    std::cout << report.render_markdown();
    std::cout << "wrote " << (outdir / "report.md").string() << " and "
              << (outdir / "report.kv").string() << "\n";
    write_manifest(outdir, "evaluate", cfg,
                   {dataset_path(cfg, outdir), outdir / "gan.ckpt", outdir / "report.kv"});
    return 0;
}

int cmd_plot(const json& cfg) {
    const fs::path outdir = resolve_output_dir(cfg);
    const ergsyn::Dataset real = load_input_dataset(cfg, outdir);
    const ergsyn::GanCheckpoint ck = load_gan_checkpoint(outdir);
    const fs::path figdir = outdir / "figures";
    fs::create_directories(figdir);

    const int n_real = cfg.at("plot").at("n_real");
    const int n_syn = cfg.at("plot").at("n_synthetic");
    const auto seed = cfg.at("seed").get<std::uint64_t>();

    ergsyn::GanSession session(ck);
    int figures = 0;
    for (const auto& [cell, norm] : ck.cell_norms) {
        std::vector<ergsyn::PlotSeries> series;
        const std::string color = cell.label == ergsyn::Label::ASD ? "#d62728" : "#1f77b4";
        for (int i = 0; i < n_syn; ++i) {
            const std::uint64_t s =
                ergsyn::fnv1a64("plot|" + cell.to_string() + "|" + std::to_string(i)) ^ seed;
            const ergsyn::ERGRecord rec = session.generate(
                ergsyn::ConditionCode{cell.label, cell.strength},
                ergsyn::LatentSeed::from_seed(s, ck.config.seq_len));
            ergsyn::PlotSeries ps;
            ps.y = rec.samples;
            ps.color = color;
            ps.width = 1.2;
            if (i == 0) ps.label = "synthetic";
            series.push_back(std::move(ps));
        }
        int added = 0;
        for (const auto& rec : real.records) {
            if (added >= n_real) break;
            if (rec.label != cell.label || !(rec.strength == cell.strength)) continue;
            ergsyn::PlotSeries ps;
            ps.y = rec.samples;
            ps.color = "#000000";
            ps.dashed = true;
            if (added == 0) ps.label = "real";
            series.push_back(std::move(ps));
            ++added;
        }
        const std::string name = "overlay-" + std::string(ergsyn::to_string(cell.label)) + "-" +
                                 cell.strength.log_cd_string() + ".svg";
        ergsyn::write_line_plot_svg(figdir / name,
                                    std::string(ergsyn::to_string(cell.label)) + " at " +
                                        cell.strength.log_cd_string(),
                                    series, "sample", "microvolts");
        ++figures;
    }

    std::vector<ergsyn::PlotSeries> loss_series;
    ergsyn::PlotSeries g{ck.curves.g_loss, "#2ca02c", false, 1.5, "generator loss"};
    ergsyn::PlotSeries d{ck.curves.d_loss, "#9467bd", false, 1.5, "discriminator loss"};
    loss_series.push_back(std::move(g));
    loss_series.push_back(std::move(d));
    ergsyn::write_line_plot_svg(figdir / "gan-loss.svg", "adversarial training loss", loss_series,
                                "epoch", "loss");
    ++figures;

    std::cout << "wrote " << figures << " figures under " << figdir.string() << "\n";
    write_manifest(outdir, "plot", cfg, {dataset_path(cfg, outdir), outdir / "gan.ckpt"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ERG waveform synthesis and classification toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides over;
    app.add_option("-c,--config", config_path, "JSON configuration file");
    auto add_overrides = [&](CLI::App* sub) {
        sub->add_option("--seed", over.seed, "override the global seed");
        sub->add_option("--output-dir", over.output_dir, "override the output directory");
        sub->add_option("--gan-epochs", over.gan_epochs, "override gan.epochs");
        sub->add_option("--gan-hidden", over.gan_hidden, "override gan.hidden");
        sub->add_option("--gan-batch", over.gan_batch, "override gan.batch");
        sub->add_option("--oracle-n-per-cell", over.oracle_n_per_cell,
                        "override dataset.oracle.n_per_cell");
        sub->add_option("--n-synthetic", over.n_synthetic,
                        "override evaluate.n_synthetic_per_cell");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "write an oracle dataset CSV");
    CLI::App* train_gan = app.add_subcommand("train-gan", "train the generative model");
    CLI::App* generate = app.add_subcommand("generate", "synthesize waveforms from a checkpoint");
    CLI::App* train_clf = app.add_subcommand("train-clf", "train classifiers on the fold split");
    CLI::App* evaluate = app.add_subcommand("evaluate", "run the augmentation experiment");
    CLI::App* plot = app.add_subcommand("plot", "emit overlay and loss figures");
    for (CLI::App* sub : {simulate, train_gan, generate, train_clf, evaluate, plot})
        add_overrides(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const json cfg = load_config(config_path, over);
        if (simulate->parsed()) return cmd_simulate(cfg);
        if (train_gan->parsed()) return cmd_train_gan(cfg);
        if (generate->parsed()) return cmd_generate(cfg);
        if (train_clf->parsed()) return cmd_train_clf(cfg);
        if (evaluate->parsed()) return cmd_evaluate(cfg);
        if (plot->parsed()) return cmd_plot(cfg);
        return 1;
    } catch (const ergsyn::TrainingDivergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ergsyn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ergsyn::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
