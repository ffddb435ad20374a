#include "ihlab/copy_task.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ihlab {

std::string CopyTaskInstance::to_json_line() const {
    nlohmann::ordered_json j;
    j["clean"] = clean;
    j["prefix_token"] = prefix_token;
    j["copy_token"] = copy_token;
    j["first_pair_pos"] = first_pair_pos;
    j["final_prefix_pos"] = final_prefix_pos;
    j["target"] = target;
    return j.dump();
}

CopyTaskInstance make_copy_instance(std::size_t vocab_size, std::size_t L,
                                    std::size_t n, RngStream& rng) {
    if (n >= L) throw std::invalid_argument("make_copy_instance: need n < L");
    if (vocab_size < L + 3)
        throw std::invalid_argument("make_copy_instance: vocabulary too small for distinct tokens");

    // L+2 distinct tokens by partial Fisher-Yates over the vocabulary.
    std::vector<Token> pool(vocab_size);
    for (std::size_t i = 0; i < vocab_size; ++i) pool[i] = static_cast<Token>(i);
    const std::size_t need = L + 2;
    for (std::size_t i = 0; i < need; ++i) {
        const std::size_t j = i + rng.next_below(vocab_size - i);
        std::swap(pool[i], pool[j]);
    }

    CopyTaskInstance inst;
    inst.prefix_token = pool[0];
    inst.copy_token = pool[1];
    inst.target = inst.copy_token;

    const Token* fill = pool.data() + 2;  // L fillers
    inst.clean.reserve(L + 3);
    for (std::size_t i = 0; i <= n; ++i) inst.clean.push_back(fill[i]);
    inst.first_pair_pos = inst.clean.size();
    inst.clean.push_back(inst.prefix_token);
    inst.clean.push_back(inst.copy_token);
    for (std::size_t i = n + 1; i < L; ++i) inst.clean.push_back(fill[i]);
    inst.final_prefix_pos = inst.clean.size();
    inst.clean.push_back(inst.prefix_token);
    return inst;
}

CopyTaskInstance make_copy_instance(std::size_t vocab_size, std::size_t L,
                                    RngStream& rng) {
    const std::size_t n = rng.next_below(L);
    return make_copy_instance(vocab_size, L, n, rng);
}

CorruptedInstance corrupt_instance(const CopyTaskInstance& inst, std::size_t vocab_size,
                                   RngStream& rng) {
    CorruptedInstance out;
    out.tokens = inst.clean;
    // Uniform over V \ {copy_token}.
    Token r = static_cast<Token>(rng.next_below(vocab_size - 1));
    if (r >= inst.copy_token) ++r;
    out.replacement = r;
    out.tokens[inst.copy_pos()] = r;
    return out;
}

}  // namespace ihlab
