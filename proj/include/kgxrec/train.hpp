#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgxrec/config.hpp"
#include "kgxrec/dataset.hpp"
#include "kgxrec/metrics.hpp"
#include "kgxrec/model.hpp"

namespace kgxrec {

struct EpochRow {
    size_t epoch = 0;
    double train_loss = 0.0;
    double valid_loss = 0.0;
    double valid_rating_loss = 0.0;
    double valid_expl_loss = 0.0;
};

struct TrainResult {
    std::vector<EpochRow> epochs;
    std::vector<double> step_losses;  // one entry per optimizer step
    std::filesystem::path best_checkpoint;
    double best_valid_loss = 0.0;
    uint64_t steps = 0;
};

struct LossSummary {
    double total = 0.0, rating = 0.0, explanation = 0.0;
};

// Mean losses over a dataset (forward only).
LossSummary evaluate_loss(const Model& model, const std::vector<EncodedExample>& data);

// Adam with global-norm clipping, per-epoch validation rows, top-k checkpoint
// retention by validation loss. `out_dir` empty disables checkpointing.
// A non-finite loss aborts with a diagnostic dump (NumericError).
TrainResult train_model(Model& model, const RunConfig& cfg, const std::vector<EncodedExample>& train,
                        const std::vector<EncodedExample>& valid, const Vocabulary& vocab,
                        const std::filesystem::path& out_dir);

// One line per epoch: epoch, train_loss, valid_loss, valid_L_r, valid_L_e.
std::string format_metrics_log(const std::vector<EpochRow>& rows);

// Decodes every example and scores the generated explanations and clamped
// ratings against the references.
metrics::MetricsReport evaluate_model(const Model& model, const std::vector<EncodedExample>& data,
                                      const Vocabulary& vocab, size_t beam_size);

struct SweepRow {
    double lambda_r = 0.0, lambda_e = 0.0;
    double bleu4 = 0.0, rmse = 0.0;
};

// Trains one fresh model per (lambda_r, lambda_e) grid point and reports
// BLEU-4 and RMSE on the evaluation split.
std::vector<SweepRow> sweep_lambda(const RunConfig& base, const std::vector<EncodedExample>& train,
                                   const std::vector<EncodedExample>& eval_set, const Vocabulary& vocab,
                                   const std::vector<std::pair<double, double>>& grid);

std::string format_sweep_report(const std::vector<SweepRow>& rows);

}  // namespace kgxrec
