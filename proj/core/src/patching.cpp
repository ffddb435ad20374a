#include "ihlab/patching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace ihlab {

double causal_importance(double l_clean, double l_corrupt, double l_patched) {
    const double denom = l_clean - l_corrupt;
    if (std::abs(denom) < kContrastEps)
        throw DegenerateContrast("causal_importance: |l_clean - l_corrupt| < 1e-9");
    return (l_patched - l_corrupt) / denom;
}

std::string ImportanceMap::to_csv() const {
    std::ostringstream out;
    out << "layer,head,importance,n_trials\n";
    char buf[64];
    for (const auto& [id, e] : heads) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.importance);
        out << id.layer << ',' << id.head << ',' << buf << ',' << e.n_trials << '\n';
    }
    return out.str();
}

bool InductionHeadSet::contains(HeadId id) const {
    return std::find(heads.begin(), heads.end(), id) != heads.end();
}

std::string InductionHeadSet::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& h : heads) j.push_back({h.layer, h.head});
    return j.dump();
}

ImportanceMap run_patch_protocol(const ModelWeights& w,
                                 const std::vector<CopyTaskInstance>& instances,
                                 RngStream& rng, bool keep_raw) {
    if (instances.empty())
        throw std::invalid_argument("run_patch_protocol: need >= 1 instance");
    const ModelConfig& cfg = w.cfg;

    ImportanceMap map;
    for (std::size_t l = 0; l < cfg.n_layers; ++l)
        for (std::size_t h = 0; h < cfg.n_heads; ++h)
            map.heads[HeadId{l, h}] = {};

    std::size_t usable_trials = 0;
    for (const auto& inst : instances) {
        if (inst.clean.size() > cfg.max_seq)
            throw std::invalid_argument("run_patch_protocol: instance exceeds max_seq");

        HookSet capture_hooks;
        capture_hooks.capture_all = true;
        ForwardResult clean = forward(w, inst.clean, capture_hooks);
        const std::size_t last = inst.clean.size() - 1;
        const double l_clean = clean.logits.at(last, inst.target);

        CorruptedInstance corr = corrupt_instance(inst, cfg.vocab_size, rng);
        ForwardResult corrupted = forward(w, corr.tokens);
        const double l_corrupt = corrupted.logits.at(last, inst.target);

        if (std::abs(l_clean - l_corrupt) < kContrastEps) continue;  // trial discarded
        ++usable_trials;

        for (auto& [id, entry] : map.heads) {
            HookSet patch_hooks;
            patch_hooks.patch[id] = clean.cache.heads.at(id).head_out;
            ForwardResult patched = forward(w, corr.tokens, patch_hooks);
            const double l_patched = patched.logits.at(last, inst.target);
            const double value = causal_importance(l_clean, l_corrupt, l_patched);
            entry.importance += value;
            entry.n_trials += 1;
            if (keep_raw) entry.raw.push_back(value);
        }
    }

    if (usable_trials == 0)
        throw std::runtime_error("run_patch_protocol: all " +
                                 std::to_string(instances.size()) +
                                 " trials degenerate (|l_clean - l_corrupt| < 1e-9)");

    for (auto& [id, entry] : map.heads)
        entry.importance /= static_cast<double>(entry.n_trials);
    return map;
}

InductionHeadSet identify_induction_heads(const ImportanceMap& map, double p) {
    if (map.heads.empty())
        throw std::invalid_argument("identify_induction_heads: empty map");
    if (!(p > 0.0 && p <= 100.0))
        throw std::invalid_argument("identify_induction_heads: need 0 < p <= 100");

    std::vector<std::pair<HeadId, double>> ranked;
    ranked.reserve(map.heads.size());
    for (const auto& [id, e] : map.heads) ranked.emplace_back(id, e.importance);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    const auto total = static_cast<double>(ranked.size());
    const std::size_t count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(p / 100.0 * total)));

    InductionHeadSet set;
    set.selection_p = p;
    for (std::size_t i = 0; i < count && i < ranked.size(); ++i)
        set.heads.push_back(ranked[i].first);

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(map.to_csv())));
    set.source_digest = buf;
    return set;
}

PatternSeq make_pattern_seq(std::size_t vocab_size, std::size_t len, RngStream& rng) {
    if (len < 3) throw std::invalid_argument("make_pattern_seq: len >= 3 required");
    if (vocab_size < len) throw std::invalid_argument("make_pattern_seq: vocabulary too small");
    std::vector<Token> pool(vocab_size);
    for (std::size_t i = 0; i < vocab_size; ++i) pool[i] = static_cast<Token>(i);
    for (std::size_t i = 0; i < len - 1; ++i) {
        const std::size_t j = i + rng.next_below(vocab_size - i);
        std::swap(pool[i], pool[j]);
    }
    PatternSeq seq;
    seq.tokens.assign(pool.begin(), pool.begin() + (len - 1));
    seq.tokens.push_back(pool[0]);  // trailing repeat of A
    seq.first_pos = 0;
    seq.second_pos = len - 1;
    seq.successor = pool[1];
    return seq;
}

double prefix_match_score(const ModelWeights& w, const PatternSeq& seq, HeadId head) {
    if (seq.tokens[seq.first_pos] != seq.tokens[seq.second_pos])
        throw std::invalid_argument("prefix_match_score: pattern token not repeated");
    HookSet hooks;
    hooks.capture.insert(head);
    ForwardResult fr = forward(w, seq.tokens, hooks);
    // The match site for a prefix [A][B] queried from a later [A] is the slot
    // holding [B]: that is where a copying head must land to promote [B], and
    // where the previous-token subspace carries the first [A]'s identity.
    return fr.cache.heads.at(head).attn.at(seq.second_pos, seq.first_pos + 1);
}

double copy_boost_score(const ModelWeights& w, const PatternSeq& seq, HeadId head) {
    if (seq.tokens[seq.first_pos] != seq.tokens[seq.second_pos])
        throw std::invalid_argument("copy_boost_score: pattern token not repeated");
    const std::size_t last = seq.tokens.size() - 1;
    ForwardResult active = forward(w, seq.tokens);
    HookSet ablate;
    ablate.scale[head] = 0.0;
    ForwardResult off = forward(w, seq.tokens, ablate);
    return active.logits.at(last, seq.successor) - off.logits.at(last, seq.successor);
}

}  // namespace ihlab
