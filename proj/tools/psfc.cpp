// psfc: compress quantized phase-shift vectors with attention autoencoders
// over a simulated AWGN feedback link.

#include "psfc/checkpoint.hpp"
#include "psfc/eval.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiverged = 1;
constexpr int kExitIo = 2;
constexpr int kExitArgs = 3;

int parse_cr_den(const std::string& s) {
    if (s == "1/2" || s == "0.5") return 2;
    if (s == "1/4" || s == "0.25") return 4;
    if (s == "1/8" || s == "0.125") return 8;
    throw std::invalid_argument("--cr: expected one of 1/2, 1/4, 1/8 (or 0.5, 0.25, 0.125)");
}

std::string cr_name(int den) { return "1/" + std::to_string(den); }

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad config line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

struct RunOptions {
    psfc::ModelConfig model;
    psfc::TrainConfig train;
    std::string profile = "desk";
};

void apply_profile(RunOptions& o) {
    if (o.profile == "desk") {
        o.train.train_count = 8192;
        o.train.val_count = 2048;
        o.train.epochs = 50;
    } else if (o.profile == "paper") {
        o.train.train_count = 128000;
        o.train.val_count = 32000;
        o.train.epochs = 1000;
    } else {
        throw std::invalid_argument("--profile: expected desk or paper");
    }
}

// Flat key=value settings shared by the config file and the run banner.
void apply_config_kv(RunOptions& o, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, val] : kv) {
        if (key == "arch") o.model.arch = psfc::arch_from_string(val);
        else if (key == "m") o.model.m = std::stoll(val);
        else if (key == "k") o.model.k = std::stoll(val);
        else if (key == "cr") o.model.cr_den = parse_cr_den(val);
        else if (key == "width") o.model.width = std::stoll(val);
        else if (key == "attention") o.model.attention = psfc::attention_kind_from_string(val);
        else if (key == "with_pooling") o.model.with_pooling = val == "1";
        else if (key == "no_joint_branch") o.model.no_joint_branch = val == "1";
        else if (key == "no_gdn") o.model.no_gdn = val == "1";
        else if (key == "batch_size") o.train.batch_size = std::stoll(val);
        else if (key == "epochs") o.train.epochs = std::stoll(val);
        else if (key == "learning_rate") o.train.learning_rate = std::stod(val);
        else if (key == "train_snr_db") o.train.train_snr_db = std::stod(val);
        else if (key == "noiseless") o.train.noiseless = val == "1";
        else if (key == "gain") o.train.gain = std::stod(val);
        else if (key == "train_count") o.train.train_count = std::stoll(val);
        else if (key == "val_count") o.train.val_count = std::stoll(val);
        else if (key == "seed") o.train.seed = std::stoull(val);
        else if (key == "profile") { o.profile = val; apply_profile(o); }
        else throw std::runtime_error("unknown config key: " + key);
    }
}

void print_banner(const RunOptions& o) {
    std::cout << "== effective configuration ==\n"
              << "arch=" << psfc::arch_name(o.model.arch) << " cr=" << cr_name(o.model.cr_den)
              << " m=" << o.model.m << " k=" << o.model.k << " width=" << o.model.width
              << " attention=" << psfc::attention_kind_name(o.model.attention) << "\n"
              << "with_pooling=" << o.model.with_pooling
              << " no_joint_branch=" << o.model.no_joint_branch << " no_gdn=" << o.model.no_gdn
              << "\n"
              << "optimizer=adam loss=mse batch_size=" << o.train.batch_size
              << " learning_rate=" << o.train.learning_rate << " epochs=" << o.train.epochs << "\n"
              << "train_snr_db=" << o.train.train_snr_db << " noiseless=" << o.train.noiseless
              << " gain=" << o.train.gain << " train_count=" << o.train.train_count
              << " val_count=" << o.train.val_count << " seed=" << o.train.seed
              << " profile=" << o.profile << "\n";
}

std::vector<double> parse_snr_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "inf" || tok == "noiseless")
            out.push_back(std::numeric_limits<double>::infinity());
        else
            out.push_back(std::stod(tok));
    }
    if (out.empty()) throw std::runtime_error("empty SNR list");
    return out;
}

void write_history_csv(const std::string& path, const std::vector<psfc::HistoryRow>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "epoch,train_loss,val_loss,val_accuracy,val_nmse_db\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(r.epoch), r.train_loss, r.val_loss, r.val_accuracy,
                      r.val_nmse_db);
        f << buf;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantized phase-shift feedback compression"};
    app.require_subcommand(1);

    // PSFC_THREADS caps the worker count; all kernels here are single-threaded,
    // so anything >= 1 is accepted and effectively 1.
    if (const char* threads = std::getenv("PSFC_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(threads, &end, 10);
        if (end == threads || *end != '\0' || n < 1) {
            std::cerr << "error: PSFC_THREADS must be a positive integer\n";
            return kExitArgs;
        }
    }

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a uniform QPS dataset file");
    int64_t g_m = 128, g_k = 8, g_count = 1000;
    uint64_t g_seed = 1;
    std::string g_out;
    gen->add_option("--m", g_m, "vector length");
    gen->add_option("--k", g_k, "bits per phase (<= 8)");
    gen->add_option("--count", g_count, "number of samples");
    gen->add_option("--seed", g_seed, "RNG seed");
    gen->add_option("--out", g_out, "output file")->required();

    // shared model/training flags
    RunOptions opts;
    apply_profile(opts);
    std::string cfg_path, arch_s, cr_s, att_s, profile_s;
    int64_t epochs_flag = -1;
    uint64_t seed_flag = 0;
    bool seed_set = false, noiseless_flag = false;
    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", cfg_path, "key=value config file");
        cmd->add_option("--arch", arch_s, "gapscn | sgapscn");
        cmd->add_option("--cr", cr_s, "compression ratio: 1/2, 1/4 or 1/8");
        cmd->add_option("--attention", att_s, "se|cbam|tse|triplet|global");
        cmd->add_option("--epochs", epochs_flag, "training epochs");
        cmd->add_option("--profile", profile_s, "desk | paper");
        cmd->add_option_function<uint64_t>(
            "--seed", [&](uint64_t v) { seed_flag = v; seed_set = true; }, "RNG seed");
        cmd->add_flag("--noiseless", noiseless_flag, "disable channel noise");
    };

    // train
    auto* tr = app.add_subcommand("train", "train a model and write checkpoint + history");
    add_run_flags(tr);
    std::string tr_out = "model.psfc", tr_hist = "history.csv", tr_resume;
    tr->add_option("--out-checkpoint", tr_out, "best-validation checkpoint path");
    tr->add_option("--out-history", tr_hist, "per-epoch history CSV path");
    tr->add_option("--resume", tr_resume, "resume from a checkpoint with optimizer state");

    // eval
    auto* ev = app.add_subcommand("eval", "sweep test SNRs for a checkpoint");
    std::string ev_ckpt, ev_snrs = "0,5,10,15,20,25", ev_csv, ev_svg;
    int64_t ev_count = 10000;
    uint64_t ev_seed = 1;
    ev->add_option("--checkpoint", ev_ckpt, "trained checkpoint")->required();
    ev->add_option("--snrs", ev_snrs, "comma-separated SNR dB list ('inf' = noiseless)");
    ev->add_option("--count", ev_count, "test samples per SNR");
    ev->add_option("--seed", ev_seed, "RNG seed");
    ev->add_option("--out-csv", ev_csv, "report CSV path");
    ev->add_option("--out-svg", ev_svg, "NMSE-vs-SNR chart path");

    // compare-attention
    auto* cmp = app.add_subcommand("compare-attention",
                                   "train attention variants under identical budgets");
    add_run_flags(cmp);
    std::string cmp_variants = "global,tse,triplet", cmp_seeds = "1,2,3", cmp_out = "compare.csv";
    cmp->add_option("--variants", cmp_variants,
                    "comma list of global,with-pooling,no-joint-branch,tse,triplet,se,cbam,no-gdn");
    cmp->add_option("--seeds", cmp_seeds, "comma list of seeds");
    cmp->add_option("--out-csv", cmp_out, "comparison CSV path");

    // inspect
    auto* ins = app.add_subcommand("inspect", "print architecture and parameter summary");
    std::string ins_ckpt;
    ins->add_option("--checkpoint", ins_ckpt, "checkpoint to inspect")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitArgs;
    }

    try {
        auto finalize_run_options = [&] {
            if (!cfg_path.empty()) apply_config_kv(opts, read_config_file(cfg_path));
            if (!profile_s.empty()) { opts.profile = profile_s; apply_profile(opts); }
            if (!arch_s.empty()) opts.model.arch = psfc::arch_from_string(arch_s);
            if (!cr_s.empty()) opts.model.cr_den = parse_cr_den(cr_s);
            if (!att_s.empty()) opts.model.attention = psfc::attention_kind_from_string(att_s);
            if (epochs_flag >= 0) opts.train.epochs = epochs_flag;
            if (seed_set) opts.train.seed = seed_flag;
            if (noiseless_flag) opts.train.noiseless = true;
            opts.model.validate();
            opts.train.validate();
            print_banner(opts);
        };

        if (*gen) {
            psfc::QpsDataset ds;
            ds.m = g_m;
            ds.k = g_k;
            ds.samples = psfc::sample_qps(g_m, g_k, g_count, g_seed);
            psfc::save_qps1(g_out, ds);
            if (g_count == 0) std::cerr << "warning: dataset is empty\n";
            std::cout << "wrote " << ds.samples.size() << " samples to " << g_out << "\n"
                      << "checksum " << std::hex << psfc::qps1_checksum(ds) << std::dec << "\n";
            return kExitOk;
        }

        if (*tr) {
            finalize_run_options();
            std::unique_ptr<psfc::Model> model;
            psfc::AdamState adam;
            int64_t start_epoch = 0;
            if (!tr_resume.empty()) {
                auto loaded = psfc::load_checkpoint(tr_resume);
                if (!loaded.adam)
                    throw psfc::CheckpointError("resume checkpoint has no optimizer state");
                model = std::move(loaded.model);
                adam = std::move(*loaded.adam);
                start_epoch = loaded.completed_epochs;
                opts.model = model->config();
                std::cout << "resuming at epoch " << start_epoch + 1 << "\n";
            } else {
                model = std::make_unique<psfc::Model>(opts.model, opts.train.seed);
            }
            std::cout << "trainable parameters: " << model->param_count() << "\n";
            psfc::TrainResult result = psfc::train(*model, opts.train, adam, start_epoch, &std::cout);
            write_history_csv(tr_hist, result.history);
            if (!result.best_params.empty()) model->restore_params(result.best_params);
            psfc::save_checkpoint(tr_out, *model, opts.train.seed, &adam, opts.train.epochs);
            if (!result.history.empty()) {
                const auto& last = result.history.back();
                std::cout << "final val_loss " << last.val_loss << " val_accuracy "
                          << last.val_accuracy << " val_nmse_db " << last.val_nmse_db << "\n"
                          << "best epoch " << result.best_epoch << " (val_loss "
                          << result.best_val_loss << ")\n";
            }
            std::cout << "wrote " << tr_out << " and " << tr_hist << "\n";
            return kExitOk;
        }

        if (*ev) {
            auto loaded = psfc::load_checkpoint(ev_ckpt);
            psfc::EvalReport report =
                psfc::sweep_snr(*loaded.model, parse_snr_list(ev_snrs), ev_count, ev_seed);
            report.label = psfc::arch_name(loaded.config.arch) + " " + cr_name(loaded.config.cr_den);
            std::cout << "snr_db,nmse_db,accuracy,samples\n";
            for (const auto& r : report.rows)
                std::cout << r.snr_db << "," << r.nmse_db << "," << r.accuracy << "," << r.samples
                          << "\n";
            if (!ev_csv.empty()) psfc::emit_csv(report, ev_csv);
            if (!ev_svg.empty()) psfc::emit_svg({report}, ev_svg);
            return kExitOk;
        }

        if (*cmp) {
            finalize_run_options();
            std::vector<std::string> variants;
            std::vector<uint64_t> seeds;
            {
                std::stringstream ss(cmp_variants);
                std::string tok;
                while (std::getline(ss, tok, ',')) variants.push_back(tok);
                std::stringstream s2(cmp_seeds);
                while (std::getline(s2, tok, ',')) seeds.push_back(std::stoull(tok));
            }
            for (const auto& v : variants) psfc::variant_config(opts.model, v);  // validate early
            auto rows = psfc::compare_attention(opts.model, opts.train, variants, seeds, &std::cout);
            std::ofstream f(cmp_out);
            if (!f) throw std::runtime_error("cannot open for writing: " + cmp_out);
            f << "# published full-scale reference (validation accuracy, cr=1/4): "
                 "global 0.9410, triplet 0.9354, tse 0.9309\n";
            f << "variant,seed,train_accuracy,val_accuracy,val_nmse_db\n";
            for (const auto& r : rows)
                f << r.variant << "," << r.seed << "," << r.train_accuracy << ","
                  << r.val_accuracy << "," << r.val_nmse_db << "\n";
            for (const auto& v : variants) {  // aggregate row per variant
                double acc = 0, nm = 0;
                int64_t n = 0;
                for (const auto& r : rows)
                    if (r.variant == v) { acc += r.val_accuracy; nm += r.val_nmse_db; ++n; }
                f << v << ",mean,," << acc / n << "," << nm / n << "\n";
            }
            std::cout << "wrote " << cmp_out << "\n";
            return kExitOk;
        }

        if (*ins) {
            auto loaded = psfc::load_checkpoint(ins_ckpt);
            const auto& model = *loaded.model;
            std::cout << "== checkpoint " << ins_ckpt << " ==\n"
                      << model.config().to_text() << "completed_epochs=" << loaded.completed_epochs
                      << "\noptimizer_state=" << (loaded.adam ? "yes" : "no") << "\n\n";
            psfc::QpsVector probe;
            probe.k = model.config().k;
            probe.indices.assign(static_cast<size_t>(model.config().m), 0);
            std::vector<psfc::ShapeTraceEntry> trace;
            psfc::NoGrad ng;
            psfc::Tensor code = model.encode(psfc::normalize(probe), false, &trace);
            model.decode(code, false, &trace);
            std::cout << "block I/O shapes:\n";
            for (const auto& t : trace)
                std::cout << "  " << t.label << "  " << psfc::shape_str(t.in) << " -> "
                          << psfc::shape_str(t.out) << "\n";
            std::cout << "\ntrainable parameters: " << model.param_count() << "\n"
                      << "  encoder: " << model.encoder_param_count() << "\n"
                      << "  decoder: " << model.decoder_param_count() << "\n";
            return kExitOk;
        }
    } catch (const psfc::TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const psfc::CheckpointError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArgs;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
