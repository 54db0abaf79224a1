#include "kgxrec/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kgxrec/error.hpp"
#include "kgxrec/text.hpp"

namespace kgxrec {

namespace {

size_t parse_size(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long long n = std::stoll(v, &pos);
        if (pos != v.size() || n < 0) throw std::invalid_argument(v);
        return static_cast<size_t>(n);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs a non-negative integer, got '" + v + "'");
    }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs an unsigned integer, got '" + v + "'");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' needs a number, got '" + v + "'");
    }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "d") model.d = parse_size(key, value);
    else if (key == "encoder_layers") model.encoder_layers = parse_size(key, value);
    else if (key == "decoder_layers") model.decoder_layers = parse_size(key, value);
    else if (key == "heads") model.heads = parse_size(key, value);
    else if (key == "ffn_hidden") model.ffn_hidden = parse_size(key, value);
    else if (key == "max_explanation_len") model.max_explanation_len = parse_size(key, value);
    else if (key == "max_input_len") model.max_input_len = parse_size(key, value);
    else if (key == "lambda_r") model.lambda_r = parse_double(key, value);
    else if (key == "lambda_e") model.lambda_e = parse_double(key, value);
    else if (key == "init_std") model.init_std = parse_double(key, value);
    else if (key == "max_user_size") limits.max_user_size = parse_size(key, value);
    else if (key == "max_kg_size") limits.max_kg_size = parse_size(key, value);
    else if (key == "max_component_len") limits.max_component_len = parse_size(key, value);
    else if (key == "lr") lr = parse_double(key, value);
    else if (key == "adam_beta1") adam_beta1 = parse_double(key, value);
    else if (key == "adam_beta2") adam_beta2 = parse_double(key, value);
    else if (key == "adam_eps") adam_eps = parse_double(key, value);
    else if (key == "clip_norm") clip_norm = parse_double(key, value);
    else if (key == "batch_size") batch_size = parse_size(key, value);
    else if (key == "epochs") epochs = parse_size(key, value);
    else if (key == "top_k") top_k = parse_size(key, value);
    else if (key == "beam") beam = parse_size(key, value);
    else if (key == "seed") seed = parse_u64(key, value);
    else if (key == "split_train") split.train = parse_double(key, value);
    else if (key == "split_valid") split.valid = parse_double(key, value);
    else if (key == "split_test") split.test = parse_double(key, value);
    else if (key == "eval_fraction") eval_fraction = parse_double(key, value);
    else if (key == "vocab_cap") vocab_cap = parse_size(key, value);
    else if (key == "dataset") dataset_path = value;
    else if (key == "out_dir") out_dir = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    RunConfig cfg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto pos = t.find('=');
        if (pos == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        cfg.set(text::trim(t.substr(0, pos)), text::trim(t.substr(pos + 1)));
    }
    return cfg;
}

void RunConfig::validate() const {
    split.validate();
    if (clip_norm <= 0.0) throw ConfigError("clip_norm must be > 0");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (top_k == 0) throw ConfigError("top_k must be >= 1");
    if (beam == 0) throw ConfigError("beam must be >= 1");
    if (lr < 0.0) throw ConfigError("lr must be >= 0");
    if (eval_fraction <= 0.0 || eval_fraction > 1.0)
        throw ConfigError("eval_fraction must be in (0, 1]");
    if (model.heads == 0 || model.d % model.heads != 0)
        throw ConfigError("d must be a positive multiple of heads");
    if (model.lambda_r < 0.0 || model.lambda_e < 0.0)
        throw ConfigError("lambda weights must be >= 0");
}

std::string RunConfig::to_key_values() const {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "d=" << model.d << '\n'
        << "encoder_layers=" << model.encoder_layers << '\n'
        << "decoder_layers=" << model.decoder_layers << '\n'
        << "heads=" << model.heads << '\n'
        << "ffn_hidden=" << model.ffn_hidden << '\n'
        << "max_explanation_len=" << model.max_explanation_len << '\n'
        << "max_input_len=" << model.max_input_len << '\n'
        << "lambda_r=" << num(model.lambda_r) << '\n'
        << "lambda_e=" << num(model.lambda_e) << '\n'
        << "init_std=" << num(model.init_std) << '\n'
        << "max_user_size=" << limits.max_user_size << '\n'
        << "max_kg_size=" << limits.max_kg_size << '\n'
        << "max_component_len=" << limits.max_component_len << '\n'
        << "lr=" << num(lr) << '\n'
        << "adam_beta1=" << num(adam_beta1) << '\n'
        << "adam_beta2=" << num(adam_beta2) << '\n'
        << "adam_eps=" << num(adam_eps) << '\n'
        << "clip_norm=" << num(clip_norm) << '\n'
        << "batch_size=" << batch_size << '\n'
        << "epochs=" << epochs << '\n'
        << "top_k=" << top_k << '\n'
        << "beam=" << beam << '\n'
        << "seed=" << seed << '\n'
        << "split_train=" << num(split.train) << '\n'
        << "split_valid=" << num(split.valid) << '\n'
        << "split_test=" << num(split.test) << '\n'
        << "eval_fraction=" << num(eval_fraction) << '\n'
        << "vocab_cap=" << vocab_cap << '\n'
        << "dataset=" << dataset_path << '\n'
        << "out_dir=" << out_dir << '\n';
    return out.str();
}

}  // namespace kgxrec
