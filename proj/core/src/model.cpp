#include "hades/model.hpp"

#include <cmath>
#include <stdexcept>

#include "hades/tensor.hpp"

namespace hades {

void ModelConfig::validate() const {
    if (d == 0 || M == 0 || H == 0 || P == 0 || N == 0 || d_conv == 0)
        throw std::invalid_argument("ModelConfig: zero dimension");
    if (V < 2) throw std::invalid_argument("ModelConfig: V < 2");
    router().validate();
    if (lambda1 < 0.0 || lambda2 < 0.0) throw std::invalid_argument("ModelConfig: negative lambda");
    if (!(pos_norm > 0.0)) throw std::invalid_argument("ModelConfig: pos_norm <= 0");
}

Model make_model(const ModelConfig& cfg) {
    cfg.validate();
    Model m;
    m.cfg = cfg;
    m.embed_in.assign(cfg.V * cfg.d, 0.0);
    m.layers.resize(cfg.L);
    for (auto& lay : m.layers) {
        lay.norm_w.assign(cfg.d, 0.0);
        lay.block = make_block_params(cfg);
    }
    m.final_norm.assign(cfg.d, 0.0);
    if (!cfg.tie_embeddings) m.embed_out.assign(cfg.d * cfg.V, 0.0);
    return m;
}

Model random_model(const ModelConfig& cfg, Rng& rng) {
    Model m = make_model(cfg);
    auto f32 = [](double x) { return static_cast<double>(static_cast<float>(x)); };
    // Unit-ish row norms keep the pre-norm well conditioned; the RMS norm
    // right after the lookup makes the row scale otherwise immaterial.
    const double es = 0.25;
    for (auto& v : m.embed_in) v = f32(rng.next_normal() * es);
    for (auto& lay : m.layers) {
        for (auto& v : lay.norm_w) v = 1.0;
        lay.block = random_block_params(cfg, rng);
    }
    for (auto& v : m.final_norm) v = 1.0;
    const double os = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    for (auto& v : m.embed_out) v = f32(rng.next_normal() * os);
    return m;
}

std::size_t total_param_count(const Model& m) {
    std::size_t n = 0;
    visit_params(const_cast<Model&>(m),
                 [&](const std::string&, std::vector<double>& t,
                     const std::vector<std::size_t>&) { n += t.size(); });
    return n;
}

void rms_norm(const std::vector<double>& x, const std::vector<double>& w,
              std::vector<double>& out) {
    const std::size_t n = x.size();
    if (w.size() != n || n == 0) throw std::invalid_argument("rms_norm: shape mismatch");
    double ms = 0.0;
    for (double v : x) ms += v * v;
    const double inv = 1.0 / std::sqrt(ms / static_cast<double>(n) + 1e-6);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * inv * w[i];
}

namespace {

void embed_tokens(const Model& m, const std::vector<std::uint32_t>& ids,
                  std::vector<double>& u) {
    const auto& c = m.cfg;
    u.assign(ids.size() * c.d, 0.0);
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] >= c.V) throw std::invalid_argument("token id out of vocab");
        const double* row = &m.embed_in[ids[t] * c.d];
        std::copy(row, row + c.d, u.begin() + t * c.d);
    }
}

void project_logits(const Model& m, const std::vector<double>& x, double* logits) {
    const auto& c = m.cfg;
    if (c.tie_embeddings) {
        // logits = x . embed_in^T
        for (std::size_t v = 0; v < c.V; ++v) {
            double s = 0.0;
            const double* row = &m.embed_in[v * c.d];
            for (std::size_t i = 0; i < c.d; ++i) s += x[i] * row[i];
            logits[v] = s;
        }
    } else {
        matvec_rowmajor(x.data(), m.embed_out.data(), logits, c.d, c.V);
    }
}

}  // namespace

ForwardResult model_forward(const Model& m, const std::vector<std::uint32_t>& ids,
                            std::vector<InferenceCache>* caches, ModelTape* tape) {
    const auto& c = m.cfg;
    const std::size_t T = ids.size();
    if (T == 0) throw std::invalid_argument("model_forward: empty sequence");

    ForwardResult res;
    res.records.resize(c.L);

    std::vector<double> u;
    embed_tokens(m, ids, u);

    if (tape) {
        tape->T = T;
        tape->ids.assign(ids.begin(), ids.end());
        tape->layer_inputs.clear();
        tape->normed_inputs.clear();
        tape->blocks.assign(c.L, BlockTape{});
        tape->layer_inputs.push_back(u);
    }
    if (caches) caches->clear();

    std::vector<double> normed(T * c.d);
    for (std::size_t l = 0; l < c.L; ++l) {
        const auto& lay = m.layers[l];
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> xt(u.begin() + t * c.d, u.begin() + (t + 1) * c.d);
            std::vector<double> nt;
            rms_norm(xt, lay.norm_w, nt);
            std::copy(nt.begin(), nt.end(), normed.begin() + t * c.d);
        }
        InferenceCache cache = make_cache(c);
        cache.router_rng = Rng(c.router_seed).split(l);
        BlockTape* bt = tape ? &tape->blocks[l] : nullptr;
        BlockResult br = block_prefill(normed, T, lay.block, c, cache, bt);
        res.balance += br.balance;
        res.diversity += br.diversity;
        res.records[l] = std::move(br.records);
        for (std::size_t i = 0; i < T * c.d; ++i) u[i] += br.out[i];
        if (tape) {
            tape->normed_inputs.push_back(normed);
            tape->layer_inputs.push_back(u);
        }
        if (caches) caches->push_back(std::move(cache));
    }
    if (c.L > 0) {
        res.balance /= static_cast<double>(c.L);
        res.diversity /= static_cast<double>(c.L);
    }

    res.logits.assign(T * c.V, 0.0);
    std::vector<double> fx(c.d), fn(c.d);
    std::vector<double> final_normed(T * c.d);
    for (std::size_t t = 0; t < T; ++t) {
        std::copy(u.begin() + t * c.d, u.begin() + (t + 1) * c.d, fx.begin());
        rms_norm(fx, m.final_norm, fn);
        std::copy(fn.begin(), fn.end(), final_normed.begin() + t * c.d);
        project_logits(m, fn, &res.logits[t * c.V]);
    }
    check_finite(res.logits, "logits");
    if (tape) {
        tape->final_in = u;
        tape->final_normed = final_normed;
        tape->logits = res.logits;
    }
    return res;
}

DecodeState make_decode_state(const Model& m) {
    DecodeState s;
    s.caches.reserve(m.cfg.L);
    for (std::size_t l = 0; l < m.cfg.L; ++l) {
        InferenceCache cache = make_cache(m.cfg);
        cache.router_rng = Rng(m.cfg.router_seed).split(l);
        s.caches.push_back(std::move(cache));
    }
    return s;
}

std::vector<double> model_decode_step(const Model& m, std::uint32_t id,
                                      DecodeState& state,
                                      std::vector<SelectionRecord>* records) {
    const auto& c = m.cfg;
    if (id >= c.V) throw std::invalid_argument("token id out of vocab");
    if (state.caches.size() != c.L) throw std::invalid_argument("decode state layer mismatch");
    std::vector<double> u(m.embed_in.begin() + id * c.d, m.embed_in.begin() + (id + 1) * c.d);
    if (records) records->resize(c.L);
    std::vector<double> normed;
    for (std::size_t l = 0; l < c.L; ++l) {
        rms_norm(u, m.layers[l].norm_w, normed);
        SelectionRecord* rec = records ? &(*records)[l] : nullptr;
        std::vector<double> o =
            block_decode_step(normed, m.layers[l].block, c, state.caches[l], rec);
        for (std::size_t i = 0; i < c.d; ++i) u[i] += o[i];
    }
    std::vector<double> fn;
    rms_norm(u, m.final_norm, fn);
    std::vector<double> logits(c.V);
    project_logits(m, fn, logits.data());
    return logits;
}

std::vector<std::uint32_t> greedy_generate(const Model& m,
                                           const std::vector<std::uint32_t>& prompt,
                                           std::size_t steps) {
    if (prompt.empty()) throw std::invalid_argument("greedy_generate: empty prompt");
    DecodeState state = make_decode_state(m);
    std::vector<double> logits;
    for (std::uint32_t id : prompt) logits = model_decode_step(m, id, state);
    std::vector<std::uint32_t> out;
    for (std::size_t s = 0; s < steps; ++s) {
        std::size_t best = 0;
        for (std::size_t v = 1; v < m.cfg.V; ++v)
            if (logits[v] > logits[best]) best = v;
        out.push_back(static_cast<std::uint32_t>(best));
        logits = model_decode_step(m, static_cast<std::uint32_t>(best), state);
    }
    return out;
}

}  // namespace hades
