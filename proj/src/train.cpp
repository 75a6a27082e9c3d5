#include "psfc/train.hpp"

#include "psfc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace psfc {

void TrainConfig::validate() const {
    if (batch_size < 1 || epochs < 0 || learning_rate <= 0 || train_count < 1 || val_count < 1)
        throw std::invalid_argument("invalid training configuration");
}

void AdamState::init_for(const ParamRegistry& reg) {
    t = 0;
    m.clear();
    v.clear();
    for (const auto& p : reg.items()) {
        if (!p.trainable) continue;
        m.emplace_back(p.tensor.data().size(), 0.0);
        v.emplace_back(p.tensor.data().size(), 0.0);
    }
}

void adam_step(ParamRegistry& reg, AdamState& s, double lr) {
    if (!s.initialized()) s.init_for(reg);
    ++s.t;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    size_t slot = 0;
    for (auto& p : reg.items()) {
        if (!p.trainable) continue;
        auto node = p.tensor.node();
        node->ensure_grad();
        auto& m = s.m[slot];
        auto& v = s.v[slot];
        ++slot;
        for (size_t i = 0; i < node->v.size(); ++i) {
            double g = node->g[i];
            if (!std::isfinite(g))
                throw std::runtime_error("non-finite gradient in parameter " + p.name);
            m[i] = s.beta1 * m[i] + (1 - s.beta1) * g;
            v[i] = s.beta2 * v[i] + (1 - s.beta2) * g * g;
            node->v[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + s.eps);
        }
    }
    reg.apply_projections();
}

Tensor mse_loss(const Tensor& theta_hat, const Tensor& theta) {
    if (theta_hat.shape() != theta.shape())
        throw std::invalid_argument("mse_loss: shape mismatch " + shape_str(theta_hat.shape()) +
                                    " vs " + shape_str(theta.shape()));
    Tensor d = sub(theta_hat, theta);
    return mean_all(mul(d, d));
}

EvalStats evaluate_samples(const Model& model, const std::vector<QpsVector>& samples,
                           const ChannelSpec& spec, uint64_t noise_seed) {
    NoGrad ng;
    Rng noise_rng(noise_seed);
    EvalStats st;
    double nmse_lin_sum = 0;
    for (const auto& q : samples) {
        Tensor theta = normalize(q);
        Tensor received = apply_channel(model.encode(theta), spec, noise_rng);
        Tensor theta_hat = model.decode(received);
        st.loss += mse_loss(theta_hat, theta).item();
        st.accuracy += accuracy(theta_hat, q);
        nmse_lin_sum += nmse(theta, theta_hat);
    }
    const double n = static_cast<double>(samples.size());
    st.loss /= n;
    st.accuracy /= n;
    st.nmse_db = nmse_db(nmse_lin_sum / n);
    return st;
}

TrainResult train(Model& model, const TrainConfig& cfg, AdamState& adam, int64_t start_epoch,
                  std::ostream* log) {
    cfg.validate();
    TrainResult result;
    if (cfg.epochs == 0 || start_epoch >= cfg.epochs) return result;

    const int64_t m = model.config().m, k = model.config().k;
    auto train_set = sample_qps(m, k, cfg.train_count, Rng::derive(cfg.seed, "data.train"));
    auto val_set = sample_qps(m, k, cfg.val_count, Rng::derive(cfg.seed, "data.val"));
    const uint64_t val_noise_seed = Rng::derive(cfg.seed, "noise.val");

    ChannelSpec spec;
    spec.gain = cfg.gain;
    spec.snr_db = cfg.train_snr_db;
    spec.noiseless = cfg.noiseless;

    if (!adam.initialized()) adam.init_for(model.params());

    std::vector<size_t> order(static_cast<size_t>(cfg.train_count));
    for (int64_t epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), size_t{0});
        Rng shuffle_rng(Rng::derive(cfg.seed, "shuffle", static_cast<uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
        Rng noise_rng(Rng::derive(cfg.seed, "noise.train", static_cast<uint64_t>(epoch)));

        double epoch_loss = 0;
        int64_t batches = 0;
        for (size_t pos = 0; pos < order.size(); pos += static_cast<size_t>(cfg.batch_size)) {
            const size_t end = std::min(pos + static_cast<size_t>(cfg.batch_size), order.size());
            const double inv_b = 1.0 / static_cast<double>(end - pos);
            for (auto& p : model.params().items())
                if (p.trainable) p.tensor.zero_grad();
            double batch_loss = 0;
            for (size_t i = pos; i < end; ++i) {
                const QpsVector& q = train_set[order[i]];
                Tensor theta = normalize(q);
                Tensor received = apply_channel(model.encode(theta, true), spec, noise_rng);
                Tensor loss = mse_loss(model.decode(received, true), theta);
                batch_loss += loss.item();
                backward(mul_scalar(loss, inv_b));
            }
            batch_loss *= inv_b;
            if (!std::isfinite(batch_loss))
                throw TrainingDiverged("training loss is non-finite at epoch " +
                                       std::to_string(epoch + 1));
            adam_step(model.params(), adam, cfg.learning_rate);
            epoch_loss += batch_loss;
            ++batches;
        }
        epoch_loss /= static_cast<double>(batches);

        EvalStats val = evaluate_samples(model, val_set, spec, val_noise_seed);
        HistoryRow row{epoch + 1, epoch_loss, val.loss, val.accuracy, val.nmse_db};
        result.history.push_back(row);
        if (result.best_epoch < 0 || val.loss < result.best_val_loss) {
            result.best_epoch = row.epoch;
            result.best_val_loss = val.loss;
            result.best_params = model.snapshot_params();
        }
        if (log)
            *log << "epoch " << row.epoch << "/" << cfg.epochs << "  train_loss " << row.train_loss
                 << "  val_loss " << row.val_loss << "  val_acc " << row.val_accuracy
                 << "  val_nmse_db " << row.val_nmse_db << std::endl;
    }
    return result;
}

}  // namespace psfc
