#include "ihlab/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ihlab {

using ordered_json = nlohmann::ordered_json;

std::string double_to_hex(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.13a", v);
    return buf;
}

double hex_to_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw CheckpointError("checkpoint: bad hex-float '" + s + "'");
    return v;
}

namespace {

ordered_json matrix_to_json(const Matrix& m) {
    ordered_json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    ordered_json data = ordered_json::array();
    for (double v : m.data) data.push_back(double_to_hex(v));
    j["data"] = std::move(data);
    return j;
}

Matrix matrix_from_json(const ordered_json& j, std::size_t rows, std::size_t cols,
                        const char* name) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw CheckpointError(std::string("checkpoint: malformed matrix ") + name);
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    if (m.rows != rows || m.cols != cols)
        throw CheckpointError(std::string("checkpoint: shape mismatch for ") + name);
    const auto& data = j.at("data");
    if (!data.is_array() || data.size() != m.rows * m.cols)
        throw CheckpointError(std::string("checkpoint: data length mismatch for ") + name);
    for (std::size_t i = 0; i < m.data.size(); ++i)
        m.data[i] = hex_to_double(data[i].get<std::string>());
    return m;
}

}  // namespace

std::string checkpoint_to_string(const ModelWeights& w, const Provenance& prov) {
    w.validate();
    ordered_json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["config"] = {
        {"n_layers", w.cfg.n_layers},   {"n_heads", w.cfg.n_heads},
        {"d_model", w.cfg.d_model},     {"d_head", w.cfg.d_head},
        {"vocab_size", w.cfg.vocab_size}, {"max_seq", w.cfg.max_seq},
    };
    j["provenance"] = {
        {"kind", prov.kind}, {"seed", prov.seed}, {"train_steps", prov.train_steps},
    };
    ordered_json jw;
    jw["token_embed"] = matrix_to_json(w.token_embed);
    jw["pos_embed"] = matrix_to_json(w.pos_embed);
    ordered_json layers = ordered_json::array();
    for (const auto& layer : w.heads) {
        ordered_json jl = ordered_json::array();
        for (const auto& h : layer) {
            ordered_json jh;
            jh["w_q"] = matrix_to_json(h.w_q);
            jh["w_k"] = matrix_to_json(h.w_k);
            jh["w_v"] = matrix_to_json(h.w_v);
            jh["w_o"] = matrix_to_json(h.w_o);
            jl.push_back(std::move(jh));
        }
        layers.push_back(std::move(jl));
    }
    jw["layers"] = std::move(layers);
    jw["unembed"] = matrix_to_json(w.unembed);
    j["weights"] = std::move(jw);
    return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint: parse failure: ") + e.what());
    }
    try {
        Checkpoint ckpt;
        ckpt.format_version = j.at("format_version").get<int>();
        if (ckpt.format_version != kCheckpointFormatVersion)
            throw CheckpointError("checkpoint: unknown format_version " +
                                  std::to_string(ckpt.format_version));
        const auto& jc = j.at("config");
        ckpt.config.n_layers = jc.at("n_layers").get<std::size_t>();
        ckpt.config.n_heads = jc.at("n_heads").get<std::size_t>();
        ckpt.config.d_model = jc.at("d_model").get<std::size_t>();
        ckpt.config.d_head = jc.at("d_head").get<std::size_t>();
        ckpt.config.vocab_size = jc.at("vocab_size").get<std::size_t>();
        ckpt.config.max_seq = jc.at("max_seq").get<std::size_t>();
        ckpt.config.validate();

        const auto& jp = j.at("provenance");
        ckpt.provenance.kind = jp.at("kind").get<std::string>();
        ckpt.provenance.seed = jp.at("seed").get<std::uint64_t>();
        ckpt.provenance.train_steps = jp.at("train_steps").get<std::uint64_t>();

        const ModelConfig& cfg = ckpt.config;
        const auto& jw = j.at("weights");
        ModelWeights w = ModelWeights::zeros(cfg);
        w.token_embed = matrix_from_json(jw.at("token_embed"), cfg.vocab_size, cfg.d_model, "token_embed");
        w.pos_embed = matrix_from_json(jw.at("pos_embed"), cfg.max_seq, cfg.d_model, "pos_embed");
        const auto& layers = jw.at("layers");
        if (!layers.is_array() || layers.size() != cfg.n_layers)
            throw CheckpointError("checkpoint: layer count mismatch");
        for (std::size_t l = 0; l < cfg.n_layers; ++l) {
            const auto& jl = layers[l];
            if (!jl.is_array() || jl.size() != cfg.n_heads)
                throw CheckpointError("checkpoint: head count mismatch");
            for (std::size_t h = 0; h < cfg.n_heads; ++h) {
                const auto& jh = jl[h];
                w.heads[l][h].w_q = matrix_from_json(jh.at("w_q"), cfg.d_model, cfg.d_head, "w_q");
                w.heads[l][h].w_k = matrix_from_json(jh.at("w_k"), cfg.d_model, cfg.d_head, "w_k");
                w.heads[l][h].w_v = matrix_from_json(jh.at("w_v"), cfg.d_model, cfg.d_head, "w_v");
                w.heads[l][h].w_o = matrix_from_json(jh.at("w_o"), cfg.d_head, cfg.d_model, "w_o");
            }
        }
        w.unembed = matrix_from_json(jw.at("unembed"), cfg.d_model, cfg.vocab_size, "unembed");
        w.validate();
        ckpt.weights = std::move(w);
        return ckpt;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint: missing or mistyped field: ") + e.what());
    }
}

void save_checkpoint(const ModelWeights& w, const Provenance& prov,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("checkpoint: cannot open for write: " + path);
    out << checkpoint_to_string(w, prov);
    if (!out) throw CheckpointError("checkpoint: write failure: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace ihlab
