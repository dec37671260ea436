#include <cmath>
#include <vector>

#include "doctest.h"
#include "hades/model.hpp"
#include "hades/rng.hpp"

using namespace hades;

namespace {

ModelConfig tiny_cfg() {
    ModelConfig c;
    c.d = 8;
    c.M = 4;
    c.H = 2;
    c.S = 1;
    c.P = 4;
    c.N = 3;
    c.d_conv = 2;
    c.L = 2;
    c.V = 16;
    return c;
}

std::vector<std::uint32_t> random_ids(Rng& r, std::size_t T, std::size_t V) {
    std::vector<std::uint32_t> ids(T);
    for (auto& v : ids) v = std::uint32_t(r.next_below(V));
    return ids;
}

}  // namespace

TEST_CASE("rms_norm matches its formula") {
    std::vector<double> x{1.0, -2.0, 3.0, 0.5};
    std::vector<double> w{1.0, 1.0, 0.5, 2.0};
    std::vector<double> out;
    rms_norm(x, w, out);
    double ms = 0.0;
    for (double v : x) ms += v * v;
    ms /= 4.0;
    for (int i = 0; i < 4; ++i)
        CHECK(out[i] == doctest::Approx(x[i] / std::sqrt(ms + 1e-6) * w[i]).epsilon(1e-14));
}

TEST_CASE("model forward: shapes, finite logits, aux losses averaged") {
    auto cfg = tiny_cfg();
    Rng r(31);
    auto m = random_model(cfg, r);
    auto ids = random_ids(r, 7, cfg.V);
    ModelTape tape;
    auto res = model_forward(m, ids, nullptr, &tape);
    CHECK(res.logits.size() == ids.size() * cfg.V);
    for (double v : res.logits) CHECK(std::isfinite(v));
    CHECK(res.records.size() == cfg.L);
    CHECK(res.balance >= 0.0);
    CHECK(res.diversity >= 0.0);
    CHECK(tape.blocks.size() == cfg.L);
    CHECK(tape.layer_inputs.size() == cfg.L + 1);
    CHECK(tape.logits == res.logits);
}

TEST_CASE("prefill and streaming decode agree at every position") {
    auto cfg = tiny_cfg();
    Rng r(32);
    auto m = random_model(cfg, r);
    auto ids = random_ids(r, 9, cfg.V);
    auto full = model_forward(m, ids);

    auto state = make_decode_state(m);
    for (std::size_t t = 0; t < ids.size(); ++t) {
        auto logits = model_decode_step(m, ids[t], state);
        for (std::size_t v = 0; v < cfg.V; ++v)
            CHECK(std::abs(logits[v] - full.logits[t * cfg.V + v]) < 1e-10);
    }
}

TEST_CASE("model_forward can hand its caches to decode") {
    auto cfg = tiny_cfg();
    Rng r(33);
    auto m = random_model(cfg, r);
    auto ids = random_ids(r, 8, cfg.V);

    // full forward over prompt + 1
    auto ids_plus = ids;
    ids_plus.push_back(3);
    auto full = model_forward(m, ids_plus);

    std::vector<InferenceCache> caches;
    (void)model_forward(m, ids, &caches);
    DecodeState st;
    st.caches = std::move(caches);
    auto logits = model_decode_step(m, 3, st);
    const std::size_t t = ids.size();
    for (std::size_t v = 0; v < cfg.V; ++v)
        CHECK(std::abs(logits[v] - full.logits[t * cfg.V + v]) < 1e-10);
}

TEST_CASE("greedy_generate is deterministic and extends the prompt") {
    auto cfg = tiny_cfg();
    Rng r(34);
    auto m = random_model(cfg, r);
    std::vector<std::uint32_t> prompt{1, 2, 3};
    auto a = greedy_generate(m, prompt, 5);
    auto b = greedy_generate(m, prompt, 5);
    CHECK(a == b);
    CHECK(a.size() == 5);
    for (auto id : a) CHECK(id < cfg.V);
}

TEST_CASE("tied embeddings drop the output matrix") {
    auto cfg = tiny_cfg();
    cfg.tie_embeddings = true;
    Rng r(35);
    auto m = random_model(cfg, r);
    CHECK(m.embed_out.empty());
    auto untied_cfg = tiny_cfg();
    Rng r2(35);
    auto m2 = random_model(untied_cfg, r2);
    CHECK(total_param_count(m) ==
          total_param_count(m2) - untied_cfg.d * untied_cfg.V);
    auto ids = random_ids(r, 5, cfg.V);
    auto res = model_forward(m, ids);
    for (double v : res.logits) CHECK(std::isfinite(v));
}

TEST_CASE("visit_params order is stable and covers every tensor") {
    auto cfg = tiny_cfg();
    Rng r(36);
    auto m = random_model(cfg, r);
    std::vector<std::string> names;
    std::size_t total = 0;
    visit_params(m, [&](const std::string& n, std::vector<double>& v,
                        const std::vector<std::size_t>& shape) {
        names.push_back(n);
        std::size_t want = 1;
        for (auto s : shape) want *= s;
        CHECK(v.size() == want);
        total += v.size();
    });
    CHECK(total == total_param_count(m));
    CHECK(names.front() == "embed_in");
    CHECK(names.back() == "embed_out");
    CHECK(names[1] == "layer0.norm_w");
    // the same order on a const model
    const Model& cm = m;
    std::vector<std::string> names2;
    visit_params(cm, [&](const std::string& n, const std::vector<double>&,
                         const std::vector<std::size_t>&) { names2.push_back(n); });
    CHECK(names == names2);
}

TEST_CASE("config validation rejects inconsistent dims") {
    auto cfg = tiny_cfg();
    CHECK_NOTHROW(cfg.validate());
    cfg.H = 5;  // H > M
    CHECK_THROWS(cfg.validate());
    cfg = tiny_cfg();
    cfg.d = 0;
    CHECK_THROWS(cfg.validate());
    cfg = tiny_cfg();
    cfg.V = 0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("gamma 0 with H = M = S reduces the router to a fixed pass-through") {
    ModelConfig cfg = tiny_cfg();
    cfg.M = 2;
    cfg.H = 2;
    cfg.S = 2;  // no experts, no selection
    cfg.gamma = 0.0;
    Rng r(37);
    auto m = random_model(cfg, r);
    auto ids = random_ids(r, 6, cfg.V);
    auto res = model_forward(m, ids);
    for (const auto& layer : res.records)
        for (const auto& rec : layer) CHECK(rec.expert_ids.empty());
    CHECK(res.balance == 0.0);
}
