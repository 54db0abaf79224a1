#include "kgxrec/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <string>

#include "kgxrec/error.hpp"
#include "kgxrec/text.hpp"

namespace kgxrec {

namespace {

constexpr uint32_t kMagic = 0x4b475843;  // "KGXC"
constexpr uint32_t kFormatVersion = 1;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Model& model, const CheckpointMeta& meta) {
    std::filesystem::create_directories(dir);
    const ModelConfig& cfg = model.config();

    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw DataError("cannot write checkpoint manifest in " + dir.string());
    manifest << "format_version=" << kFormatVersion << '\n'
             << "step=" << meta.step << '\n'
             << "epoch=" << meta.epoch << '\n'
             << "valid_loss=" << fmt_double(meta.valid_loss) << '\n'
             << "vocab_hash=" << meta.vocab_hash << '\n'
             << "vocab_size=" << cfg.vocab_size << '\n'
             << "d=" << cfg.d << '\n'
             << "encoder_layers=" << cfg.encoder_layers << '\n'
             << "decoder_layers=" << cfg.decoder_layers << '\n'
             << "heads=" << cfg.heads << '\n'
             << "ffn_hidden=" << cfg.ffn_hidden << '\n'
             << "max_explanation_len=" << cfg.max_explanation_len << '\n'
             << "max_input_len=" << cfg.max_input_len << '\n'
             << "lambda_r=" << fmt_double(cfg.lambda_r) << '\n'
             << "lambda_e=" << fmt_double(cfg.lambda_e) << '\n'
             << "init_std=" << fmt_double(cfg.init_std) << '\n'
             << "param_count=" << model.parameter_count() << '\n';
    manifest.close();

    std::ofstream blob(dir / "params.bin", std::ios::binary);
    if (!blob) throw DataError("cannot write checkpoint parameters in " + dir.string());
    uint64_t count = model.parameter_count();
    blob.write(reinterpret_cast<const char*>(&kMagic), sizeof(kMagic));
    blob.write(reinterpret_cast<const char*>(&kFormatVersion), sizeof(kFormatVersion));
    blob.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& [name, t] : model.named_parameters()) {
        const auto& v = t.value();
        blob.write(reinterpret_cast<const char*>(v.data()),
                   static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (!blob) throw DataError("short write while saving checkpoint in " + dir.string());
}

std::pair<Model, CheckpointMeta> load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.txt");
    if (!manifest) throw DataError("cannot read checkpoint manifest in " + dir.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        auto pos = line.find('=');
        if (pos == std::string::npos)
            throw DataError("malformed manifest line in " + dir.string() + ": " + line);
        kv[line.substr(0, pos)] = line.substr(pos + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError("manifest in " + dir.string() + " is missing key " + key);
        return it->second;
    };
    if (std::stoul(need("format_version")) != kFormatVersion)
        throw DataError("unsupported checkpoint format version in " + dir.string());

    ModelConfig cfg;
    cfg.vocab_size = std::stoul(need("vocab_size"));
    cfg.d = std::stoul(need("d"));
    cfg.encoder_layers = std::stoul(need("encoder_layers"));
    cfg.decoder_layers = std::stoul(need("decoder_layers"));
    cfg.heads = std::stoul(need("heads"));
    cfg.ffn_hidden = std::stoul(need("ffn_hidden"));
    cfg.max_explanation_len = std::stoul(need("max_explanation_len"));
    cfg.max_input_len = std::stoul(need("max_input_len"));
    cfg.lambda_r = std::stod(need("lambda_r"));
    cfg.lambda_e = std::stod(need("lambda_e"));
    cfg.init_std = std::stod(need("init_std"));

    CheckpointMeta meta;
    meta.step = std::stoull(need("step"));
    meta.epoch = std::stoull(need("epoch"));
    meta.valid_loss = std::stod(need("valid_loss"));
    meta.vocab_hash = std::stoull(need("vocab_hash"));

    Model model(cfg, 0);

    std::ifstream blob(dir / "params.bin", std::ios::binary);
    if (!blob) throw DataError("cannot read checkpoint parameters in " + dir.string());
    uint32_t magic = 0, version = 0;
    uint64_t count = 0;
    blob.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    blob.read(reinterpret_cast<char*>(&version), sizeof(version));
    blob.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!blob || magic != kMagic || version != kFormatVersion)
        throw DataError("bad parameter blob header in " + dir.string());
    if (count != model.parameter_count())
        throw DataError("parameter count mismatch in " + dir.string());
    for (auto& [name, t] : model.named_parameters()) {
        auto& v = t.value();
        blob.read(reinterpret_cast<char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (!blob) throw DataError("short read while loading checkpoint in " + dir.string());
    return {std::move(model), meta};
}

}  // namespace kgxrec
