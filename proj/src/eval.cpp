#include "psfc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace psfc {

double nmse(const Tensor& theta, const Tensor& theta_hat) {
    if (theta.shape() != theta_hat.shape())
        throw std::invalid_argument("nmse: shape mismatch");
    double num = 0, den = 0;
    const auto& a = theta.data();
    const auto& b = theta_hat.data();
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        num += d * d;
        den += a[i] * a[i];
    }
    if (den == 0.0) throw std::domain_error("nmse: zero-norm reference");
    return num / den;
}

double nmse_db(double linear) {
    if (linear <= 0) return -100.0;
    return std::max(10.0 * std::log10(linear), -100.0);
}

double accuracy(const Tensor& theta_hat, const QpsVector& q) {
    QpsVector r = requantize(theta_hat, q.k);
    if (r.indices.size() != q.indices.size())
        throw std::invalid_argument("accuracy: length mismatch");
    int64_t hits = 0;
    for (size_t i = 0; i < q.indices.size(); ++i)
        if (r.indices[i] == q.indices[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(q.indices.size());
}

EvalReport sweep_snr(const Model& model, const std::vector<double>& snrs_db, int64_t test_count,
                     uint64_t seed, double gain) {
    auto samples = sample_qps(model.config().m, model.config().k, test_count,
                              Rng::derive(seed, "data.test"));
    std::vector<double> snrs = snrs_db;
    std::sort(snrs.begin(), snrs.end());
    EvalReport report;
    for (size_t i = 0; i < snrs.size(); ++i) {
        ChannelSpec spec;
        spec.gain = gain;
        spec.snr_db = snrs[i];
        spec.noiseless = std::isinf(snrs[i]);
        EvalStats st =
            evaluate_samples(model, samples, spec, Rng::derive(seed, "noise.test", i));
        report.rows.push_back({snrs[i], st.nmse_db, st.accuracy, test_count});
    }
    return report;
}

ModelConfig variant_config(const ModelConfig& base, const std::string& variant) {
    ModelConfig c = base;
    c.attention = AttentionKind::Global;
    c.with_pooling = false;
    c.no_joint_branch = false;
    c.no_gdn = false;
    if (variant == "global") {
    } else if (variant == "with-pooling") {
        c.with_pooling = true;
    } else if (variant == "no-joint-branch") {
        c.no_joint_branch = true;
    } else if (variant == "no-gdn") {
        c.no_gdn = true;
    } else if (variant == "tse" || variant == "triplet" || variant == "se" || variant == "cbam") {
        c.attention = attention_kind_from_string(variant);
    } else {
        throw std::invalid_argument("unknown attention variant: " + variant);
    }
    return c;
}

std::vector<VariantResult> compare_attention(const ModelConfig& base, const TrainConfig& budget,
                                             const std::vector<std::string>& variants,
                                             const std::vector<uint64_t>& seeds,
                                             std::ostream* log) {
    std::vector<VariantResult> out;
    for (const auto& name : variants) {
        ModelConfig cfg = variant_config(base, name);
        for (uint64_t seed : seeds) {
            if (log) *log << "variant " << name << " seed " << seed << "\n";
            Model model(cfg, seed);
            TrainConfig tc = budget;
            tc.seed = seed;
            AdamState adam;
            TrainResult tr = train(model, tc, adam, 0, log);
            if (!tr.best_params.empty()) model.restore_params(tr.best_params);

            ChannelSpec spec;
            spec.gain = tc.gain;
            spec.snr_db = tc.train_snr_db;
            spec.noiseless = tc.noiseless;
            auto train_set = sample_qps(cfg.m, cfg.k, tc.train_count, Rng::derive(seed, "data.train"));
            auto val_set = sample_qps(cfg.m, cfg.k, tc.val_count, Rng::derive(seed, "data.val"));
            EvalStats tr_stats =
                evaluate_samples(model, train_set, spec, Rng::derive(seed, "noise.val"));
            EvalStats val_stats =
                evaluate_samples(model, val_set, spec, Rng::derive(seed, "noise.val"));
            out.push_back({name, seed, tr_stats.accuracy, val_stats.accuracy, val_stats.nmse_db});
        }
    }
    return out;
}

namespace {
std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}
}  // namespace

void emit_csv(const EvalReport& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "snr_db,nmse_db,accuracy,samples\n";
    for (const auto& r : report.rows)
        f << fmt6(r.snr_db) << "," << fmt6(r.nmse_db) << "," << fmt6(r.accuracy) << ","
          << r.samples << "\n";
    if (!f) throw std::runtime_error("write failed: " + path);
}

void emit_svg(const std::vector<EvalReport>& reports, const std::string& path) {
    const double w = 640, h = 420, ml = 60, mr = 20, mt = 20, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& rep : reports)
        for (const auto& r : rep.rows) {
            double x = std::isinf(r.snr_db) ? 40.0 : r.snr_db;  // place the noiseless point far right
            xmin = std::min(xmin, x); xmax = std::max(xmax, x);
            ymin = std::min(ymin, r.nmse_db); ymax = std::max(ymax, r.nmse_db);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto sy = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    f << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-size=\"14\">SNR (dB)</text>\n";
    f << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 "
      << (mt + h - mb) / 2 << ")\">NMSE (dB)</text>\n";
    size_t ci = 0;
    for (const auto& rep : reports) {
        const char* color = colors[ci % 6];
        std::ostringstream pts;
        for (const auto& r : rep.rows) {
            double x = std::isinf(r.snr_db) ? 40.0 : r.snr_db;
            pts << sx(x) << "," << sy(r.nmse_db) << " ";
            f << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(r.nmse_db) << "\" r=\"3\" fill=\""
              << color << "\"/>\n";
        }
        f << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";
        f << "<text x=\"" << w - mr - 6 << "\" y=\"" << mt + 16 + 16 * static_cast<double>(ci)
          << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">"
          << (rep.label.empty() ? "series" : rep.label) << "</text>\n";
        ++ci;
    }
    f << "</svg>\n";
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace psfc
