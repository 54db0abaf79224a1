#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "helpers.hpp"
#include "kgxrec/adam.hpp"
#include "kgxrec/checkpoint.hpp"
#include "kgxrec/config.hpp"
#include "kgxrec/error.hpp"
#include "kgxrec/train.hpp"

using namespace kgxrec;
using namespace testing;
namespace fs = std::filesystem;

namespace {

RunConfig small_run_config(size_t vocab) {
    RunConfig cfg;
    cfg.model.d = 8;
    cfg.model.heads = 1;
    cfg.model.encoder_layers = 1;
    cfg.model.decoder_layers = 1;
    cfg.model.ffn_hidden = 16;
    cfg.model.vocab_size = vocab;
    cfg.model.max_explanation_len = 24;
    cfg.model.max_input_len = 64;
    cfg.batch_size = 4;
    cfg.epochs = 2;
    cfg.seed = 7;
    return cfg;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("split of 10 single-item records lands exactly on 6/2/2") {
    auto records = make_synthetic_records(10);
    auto split = split_dataset(records, SplitRatios{}, 123);
    CHECK(split.train.size() == 6);
    CHECK(split.valid.size() == 2);
    CHECK(split.test.size() == 2);
}

TEST_CASE("splitting is deterministic per seed") {
    auto records = make_synthetic_records(12);
    auto a = split_dataset(records, SplitRatios{}, 5);
    auto b = split_dataset(records, SplitRatios{}, 5);
    REQUIRE(a.train.size() == b.train.size());
    for (size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].item_id == b.train[i].item_id);
    REQUIRE(a.test.size() == b.test.size());
    for (size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i].item_id == b.test[i].item_id);
}

TEST_CASE("split is grouped by item so test items never appear in train") {
    // Multiple records per item: duplicate each synthetic item for two users.
    auto base = make_synthetic_records(15);
    std::vector<DatasetRecord> records;
    for (const auto& r : base) {
        records.push_back(r);
        DatasetRecord dup = r;
        dup.user_id = "other_" + r.user_id;
        records.push_back(dup);
    }
    auto split = split_dataset(records, SplitRatios{}, 99);
    std::set<std::string> train_items, test_items, valid_items;
    for (const auto& r : split.train) train_items.insert(r.item_id);
    for (const auto& r : split.valid) valid_items.insert(r.item_id);
    for (const auto& r : split.test) test_items.insert(r.item_id);
    for (const auto& item : test_items) {
        CHECK(train_items.count(item) == 0);
        CHECK(valid_items.count(item) == 0);
    }
}

TEST_CASE("degenerate split inputs are rejected") {
    auto records = make_synthetic_records(2);
    CHECK_THROWS_AS(split_dataset(records, SplitRatios{}, 1), DataError);
    SplitRatios bad{0.5, 0.2, 0.2};
    CHECK_THROWS_AS(split_dataset(make_synthetic_records(10), bad, 1), ConfigError);
}

TEST_CASE("zero learning rate leaves parameters untouched after an epoch") {
    auto corpus = prepare_corpus(make_synthetic_records(8));
    RunConfig cfg = small_run_config(corpus.vocab.size());
    cfg.lr = 0.0;
    cfg.epochs = 1;
    Model model(cfg.model, cfg.seed);
    std::vector<std::vector<double>> before;
    for (const auto& [name, t] : model.named_parameters()) before.push_back(t.value());
    train_model(model, cfg, corpus.encoded, corpus.encoded, corpus.vocab, {});
    size_t i = 0;
    for (const auto& [name, t] : model.named_parameters()) {
        CHECK(t.value() == before[i]);
        ++i;
    }
}

TEST_CASE("single-sample training loss strictly decreases over the first 10 steps") {
    auto corpus = prepare_corpus(make_synthetic_records(4));
    std::vector<EncodedExample> one{corpus.encoded[0]};
    RunConfig cfg = small_run_config(corpus.vocab.size());
    cfg.batch_size = 1;
    cfg.epochs = 10;
    Model model(cfg.model, cfg.seed);
    auto result = train_model(model, cfg, one, one, corpus.vocab, {});
    REQUIRE(result.step_losses.size() == 10);
    for (size_t s = 1; s < result.step_losses.size(); ++s)
        CHECK(result.step_losses[s] < result.step_losses[s - 1]);
}

TEST_CASE("gradient clipping rescales the global norm to the threshold") {
    nn::Rng rng(12);
    std::vector<nn::Tensor> params = {nn::Tensor::randn(3, 3, 1.0, rng), nn::Tensor::randn(2, 5, 1.0, rng)};
    for (auto& p : params)
        for (size_t i = 0; i < p.size(); ++i) p.grad()[i] = 1000.0 * (static_cast<double>(i) + 1.0);
    const double before = global_grad_norm(params);
    CHECK(before > 1.0);
    const double reported = clip_gradients(params, 1.0);
    CHECK(reported == doctest::Approx(before).epsilon(1e-12));
    CHECK(global_grad_norm(params) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("clipping never increases the gradient norm") {
    nn::Rng rng(13);
    std::vector<nn::Tensor> params = {nn::Tensor::randn(4, 4, 1.0, rng)};
    for (auto& p : params)
        for (size_t i = 0; i < p.size(); ++i) p.grad()[i] = 1e-3 * rng.normal();
    const double before = global_grad_norm(params);
    clip_gradients(params, 1.0);
    CHECK(global_grad_norm(params) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("adam with zero gradients keeps parameters fixed") {
    nn::Rng rng(14);
    nn::Tensor p = nn::Tensor::randn(2, 2, 1.0, rng);
    std::vector<double> before = p.value();
    Adam adam({p}, AdamConfig{});
    adam.zero_grad();
    adam.step();
    CHECK(p.value() == before);
}

TEST_CASE("checkpoints round-trip bit-exactly and reproduce forward outputs") {
    TempDir dir("kgxrec_ckpt_test");
    auto corpus = prepare_corpus(make_synthetic_records(6));
    RunConfig cfg = small_run_config(corpus.vocab.size());
    Model model(cfg.model, 31);

    CheckpointMeta meta{17, 3, 0.25, corpus.vocab.hash()};
    save_checkpoint(dir.path / "ck", model, meta);
    auto [loaded, loaded_meta] = load_checkpoint(dir.path / "ck");

    CHECK(loaded_meta.step == 17);
    CHECK(loaded_meta.epoch == 3);
    CHECK(loaded_meta.vocab_hash == corpus.vocab.hash());

    auto orig = model.named_parameters();
    auto redo = loaded.named_parameters();
    REQUIRE(orig.size() == redo.size());
    for (size_t i = 0; i < orig.size(); ++i) {
        REQUIRE(orig[i].second.size() == redo[i].second.size());
        for (size_t j = 0; j < orig[i].second.size(); ++j)
            CHECK(orig[i].second.value()[j] == redo[i].second.value()[j]);  // bitwise
    }
    const auto& seq = corpus.encoded[0].seq;
    CHECK(model.rate(seq) == loaded.rate(seq));
    CHECK(model.generate(seq, 2) == loaded.generate(seq, 2));
}

TEST_CASE("identical seed and config reproduce the metrics log byte for byte") {
    auto corpus = prepare_corpus(make_synthetic_records(8));
    RunConfig cfg = small_run_config(corpus.vocab.size());
    cfg.epochs = 3;

    Model m1(cfg.model, cfg.seed);
    auto r1 = train_model(m1, cfg, corpus.encoded, corpus.encoded, corpus.vocab, {});
    Model m2(cfg.model, cfg.seed);
    auto r2 = train_model(m2, cfg, corpus.encoded, corpus.encoded, corpus.vocab, {});
    CHECK(format_metrics_log(r1.epochs) == format_metrics_log(r2.epochs));
    CHECK(r1.step_losses == r2.step_losses);
}

TEST_CASE("training writes the metrics log and retains top-k checkpoints") {
    TempDir dir("kgxrec_train_out");
    auto corpus = prepare_corpus(make_synthetic_records(8));
    RunConfig cfg = small_run_config(corpus.vocab.size());
    cfg.epochs = 5;
    cfg.top_k = 2;
    Model model(cfg.model, cfg.seed);
    auto result = train_model(model, cfg, corpus.encoded, corpus.encoded, corpus.vocab, dir.path);

    CHECK(fs::exists(dir.path / "metrics.tsv"));
    CHECK(fs::exists(result.best_checkpoint / "params.bin"));
    size_t epoch_dirs = 0;
    for (const auto& e : fs::directory_iterator(dir.path)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("ckpt-e", 0) == 0) ++epoch_dirs;
    }
    CHECK(epoch_dirs <= 2);

    std::ifstream log_file(dir.path / "metrics.tsv");
    std::string content((std::istreambuf_iterator<char>(log_file)), std::istreambuf_iterator<char>());
    CHECK(content == format_metrics_log(result.epochs));
    REQUIRE(result.epochs.size() == 5);
}

TEST_CASE("zero epochs writes only the initial checkpoint") {
    TempDir dir("kgxrec_epoch0");
    auto corpus = prepare_corpus(make_synthetic_records(6));
    RunConfig cfg = small_run_config(corpus.vocab.size());
    cfg.epochs = 0;
    Model model(cfg.model, cfg.seed);
    auto result = train_model(model, cfg, corpus.encoded, corpus.encoded, corpus.vocab, dir.path);
    CHECK(result.epochs.empty());
    CHECK(fs::exists(dir.path / "best" / "params.bin"));
}

TEST_CASE("config files parse, validate, and reject unknown keys") {
    TempDir dir("kgxrec_cfg");
    {
        std::ofstream out(dir.path / "good.cfg");
        out << "# comment\n"
            << "d = 16\n"
            << "heads=2\n"
            << "lambda_r = 0.5\n"
            << "epochs=3\n"
            << "dataset=data.tsv\n";
    }
    RunConfig cfg = RunConfig::load(dir.path / "good.cfg");
    CHECK(cfg.model.d == 16);
    CHECK(cfg.model.heads == 2);
    CHECK(cfg.model.lambda_r == 0.5);
    CHECK(cfg.epochs == 3);
    CHECK(cfg.dataset_path == "data.tsv");
    CHECK_NOTHROW(cfg.validate());

    {
        std::ofstream out(dir.path / "bad.cfg");
        out << "no_such_key=1\n";
    }
    CHECK_THROWS_AS(RunConfig::load(dir.path / "bad.cfg"), ConfigError);

    CHECK_THROWS_AS(cfg.set("epochs", "three"), ConfigError);
    CHECK_THROWS_AS(cfg.set("mystery", "1"), ConfigError);
    cfg.set("beam", "7");
    CHECK(cfg.beam == 7);

    RunConfig invalid;
    invalid.split.train = 0.9;  // ratios no longer sum to 1
    CHECK_THROWS_AS(invalid.validate(), ConfigError);
}

TEST_CASE("sweep emits one row per grid point") {
    auto corpus = prepare_corpus(make_synthetic_records(6));
    RunConfig cfg = small_run_config(corpus.vocab.size());
    cfg.epochs = 1;
    cfg.beam = 1;
    std::vector<std::pair<double, double>> grid{{0.01, 1.0}};
    auto rows = sweep_lambda(cfg, corpus.encoded, corpus.encoded, corpus.vocab, grid);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].lambda_r == 0.01);
    CHECK(rows[0].lambda_e == 1.0);

    grid.push_back({0.0, 1.0});
    grid.push_back({1.0, 0.0});
    auto rows3 = sweep_lambda(cfg, corpus.encoded, corpus.encoded, corpus.vocab, grid);
    CHECK(rows3.size() == 3);
    const std::string report = format_sweep_report(rows3);
    CHECK(std::count(report.begin(), report.end(), '\n') == 4);  // header + 3 rows
}

TEST_CASE("non-finite loss aborts with a diagnostic dump") {
    TempDir dir("kgxrec_blowup");
    auto corpus = prepare_corpus(make_synthetic_records(4));
    RunConfig cfg = small_run_config(corpus.vocab.size());
    cfg.epochs = 1;
    Model model(cfg.model, cfg.seed);
    // Poison the rating projection; the loss goes NaN without tripping the
    // encoder's input-finiteness guard.
    model.rating_user_proj().at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train_model(model, cfg, corpus.encoded, corpus.encoded, corpus.vocab, dir.path),
                    NumericError);
    CHECK(fs::exists(dir.path / "diagnostic_dump.txt"));
}
