#include "kgxrec/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kgxrec/adam.hpp"
#include "kgxrec/checkpoint.hpp"
#include "kgxrec/error.hpp"
#include "kgxrec/log.hpp"
#include "kgxrec/rng.hpp"

namespace kgxrec {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void dump_diagnostics(const std::filesystem::path& out_dir, const Model& model, size_t epoch,
                      size_t step, double loss) {
    if (out_dir.empty()) return;
    std::filesystem::create_directories(out_dir);
    std::ofstream dump(out_dir / "diagnostic_dump.txt");
    dump << "non-finite loss\nepoch=" << epoch << "\nstep=" << step << "\nloss=" << fmt(loss) << '\n';
    for (const auto& [name, t] : model.named_parameters()) {
        double norm = 0.0;
        bool finite = true;
        for (double v : t.value()) {
            norm += v * v;
            finite = finite && std::isfinite(v);
        }
        dump << name << " norm=" << fmt(std::sqrt(norm)) << " finite=" << (finite ? 1 : 0) << '\n';
    }
}

struct CheckpointSlot {
    double valid_loss;
    size_t epoch;
    std::filesystem::path dir;
};

}  // namespace

LossSummary evaluate_loss(const Model& model, const std::vector<EncodedExample>& data) {
    if (data.empty()) throw DataError("evaluate_loss: empty dataset");
    LossSummary s;
    for (const EncodedExample& ex : data) {
        Model::SampleLoss l = model.sample_loss(ex.seq, ex.rating, ex.expl_ids);
        s.rating += l.rating_sq;
        s.explanation += l.expl_nll;
    }
    const double n = static_cast<double>(data.size());
    s.rating /= n;
    s.explanation /= n;
    s.total = model.config().lambda_r * s.rating + model.config().lambda_e * s.explanation;
    return s;
}

TrainResult train_model(Model& model, const RunConfig& cfg, const std::vector<EncodedExample>& train,
                        const std::vector<EncodedExample>& valid, const Vocabulary& vocab,
                        const std::filesystem::path& out_dir) {
    if (train.empty()) throw DataError("train_model: empty training split");
    if (valid.empty()) throw DataError("train_model: empty validation split");

    std::vector<nn::Tensor> params = model.parameters();
    Adam adam(params, AdamConfig{cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});

    TrainResult result;
    std::vector<CheckpointSlot> retained;
    const bool persist = !out_dir.empty();
    if (persist) std::filesystem::create_directories(out_dir);

    auto save_best = [&](size_t epoch, double valid_loss) {
        if (!persist) return;
        CheckpointMeta meta{adam.steps(), epoch, valid_loss, vocab.hash()};
        // Retain the top-k epochs by validation loss.
        if (retained.size() >= cfg.top_k) {
            auto worst = std::max_element(retained.begin(), retained.end(),
                                          [](const CheckpointSlot& a, const CheckpointSlot& b) {
                                              return a.valid_loss < b.valid_loss;
                                          });
            if (worst->valid_loss <= valid_loss) return;
            std::filesystem::remove_all(worst->dir);
            retained.erase(worst);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "ckpt-e%05zu", epoch);
        std::filesystem::path dir = out_dir / name;
        save_checkpoint(dir, model, meta);
        retained.push_back({valid_loss, epoch, dir});
        auto best = std::min_element(retained.begin(), retained.end(),
                                     [](const CheckpointSlot& a, const CheckpointSlot& b) {
                                         return a.valid_loss < b.valid_loss;
                                     });
        if (best->epoch == epoch) {
            save_checkpoint(out_dir / "best", model, meta);
            result.best_checkpoint = out_dir / "best";
            result.best_valid_loss = valid_loss;
        }
    };

    // Epoch 0 row: initial model, no updates yet.
    if (cfg.epochs == 0 && persist) {
        LossSummary v0 = evaluate_loss(model, valid);
        save_best(0, v0.total);
    }

    for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Deterministic per-epoch order, independent of prior epochs.
        std::vector<size_t> order(train.size());
        std::iota(order.begin(), order.end(), 0);
        nn::Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + epoch);
        rng.shuffle(order);

        double epoch_loss = 0.0;
        size_t step_in_epoch = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            adam.zero_grad();
            double batch_loss = 0.0;
            for (size_t i = start; i < end; ++i) {
                const EncodedExample& ex = train[order[i]];
                Model::SampleLoss l = model.sample_loss(ex.seq, ex.rating, ex.expl_ids);
                const double value = l.loss.scalar();
                if (!std::isfinite(value)) {
                    dump_diagnostics(out_dir, model, epoch, step_in_epoch, value);
                    throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
                }
                batch_loss += value * inv_batch;
                l.loss.backward(inv_batch);
            }
            clip_gradients(params, cfg.clip_norm);
            adam.step();
            result.step_losses.push_back(batch_loss);
            epoch_loss += batch_loss * static_cast<double>(end - start);
            ++step_in_epoch;
        }
        epoch_loss /= static_cast<double>(order.size());

        LossSummary v = evaluate_loss(model, valid);
        if (!std::isfinite(v.total)) {
            dump_diagnostics(out_dir, model, epoch, step_in_epoch, v.total);
            throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
        }
        result.epochs.push_back({epoch, epoch_loss, v.total, v.rating, v.explanation});
        log::info("epoch " + std::to_string(epoch) + " train_loss=" + fmt(epoch_loss) +
                  " valid_loss=" + fmt(v.total));
        save_best(epoch, v.total);
    }
    result.steps = adam.steps();

    if (persist) {
        std::ofstream log_file(out_dir / "metrics.tsv");
        log_file << format_metrics_log(result.epochs);
    }
    return result;
}

std::string format_metrics_log(const std::vector<EpochRow>& rows) {
    std::ostringstream out;
    for (const EpochRow& r : rows) {
        out << r.epoch << '\t' << fmt(r.train_loss) << '\t' << fmt(r.valid_loss) << '\t'
            << fmt(r.valid_rating_loss) << '\t' << fmt(r.valid_expl_loss) << '\n';
    }
    return out.str();
}

metrics::MetricsReport evaluate_model(const Model& model, const std::vector<EncodedExample>& data,
                                      const Vocabulary& vocab, size_t beam_size) {
    if (data.empty()) throw DataError("evaluate_model: empty dataset");
    std::vector<std::string> candidates, references;
    std::vector<double> predictions, truths;
    double ec_sum = 0.0;
    for (const EncodedExample& ex : data) {
        RatedExplanation out = model.rate_and_explain(ex.seq, beam_size);
        std::string generated = vocab.decode(out.explanation);
        candidates.push_back(generated);
        references.push_back(ex.reference_explanation);
        predictions.push_back(clamp_rating(out.rating));
        truths.push_back(ex.rating);
        ec_sum += metrics::entity_coverage(ex.kg, generated);
    }
    metrics::MetricsReport rep;
    rep.bleu1 = metrics::bleu(candidates, references, 1);
    rep.bleu4 = metrics::bleu(candidates, references, 4);
    rep.usr = metrics::usr(candidates);
    metrics::RougeReport rr = metrics::rouge(candidates, references);
    rep.rouge2_f = rr.rouge2.f;
    rep.rouge2_r = rr.rouge2.r;
    rep.rouge2_p = rr.rouge2.p;
    rep.rougeL_f = rr.rougeL.f;
    rep.rougeL_r = rr.rougeL.r;
    rep.rougeL_p = rr.rougeL.p;
    rep.ec = 100.0 * ec_sum / static_cast<double>(data.size());
    auto [rmse, mae] = metrics::rmse_mae(predictions, truths);
    rep.rmse = rmse;
    rep.mae = mae;
    return rep;
}

std::vector<SweepRow> sweep_lambda(const RunConfig& base, const std::vector<EncodedExample>& train,
                                   const std::vector<EncodedExample>& eval_set, const Vocabulary& vocab,
                                   const std::vector<std::pair<double, double>>& grid) {
    std::vector<SweepRow> rows;
    for (const auto& [lambda_r, lambda_e] : grid) {
        RunConfig cfg = base;
        cfg.model.lambda_r = lambda_r;
        cfg.model.lambda_e = lambda_e;
        Model model(cfg.model, cfg.seed);
        train_model(model, cfg, train, eval_set, vocab, {});
        metrics::MetricsReport rep = evaluate_model(model, eval_set, vocab, cfg.beam);
        rows.push_back({lambda_r, lambda_e, rep.bleu4, rep.rmse});
        log::info("sweep lambda_r=" + fmt(lambda_r) + " lambda_e=" + fmt(lambda_e) +
                  " bleu4=" + fmt(rep.bleu4) + " rmse=" + fmt(rep.rmse));
    }
    return rows;
}

std::string format_sweep_report(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "lambda_r\tlambda_e\tbleu4\trmse\n";
    for (const SweepRow& r : rows)
        out << fmt(r.lambda_r) << '\t' << fmt(r.lambda_e) << '\t' << fmt(r.bleu4) << '\t'
            << fmt(r.rmse) << '\n';
    return out.str();
}

}  // namespace kgxrec
