#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "ihlab/model.hpp"

namespace ihlab {

// Checkpoints are canonical JSON: fixed key order, floats encoded as C99
// hex-float strings so every double round-trips bit-exactly. Serializing the
// same weights twice yields byte-identical files.

struct Provenance {
    std::string kind = "wired";  // wired | trained
    std::uint64_t seed = 0;
    std::uint64_t train_steps = 0;

    bool operator==(const Provenance&) const = default;
};

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
    int format_version = kCheckpointFormatVersion;
    ModelConfig config;
    Provenance provenance;
    ModelWeights weights;
};

// Canonical serialization (the exact bytes save_checkpoint writes).
std::string checkpoint_to_string(const ModelWeights& w, const Provenance& prov);

// Throws CheckpointError on malformed input, unknown format_version or
// shape mismatch with the embedded config; never returns a partial model.
Checkpoint checkpoint_from_string(const std::string& text);

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void save_checkpoint(const ModelWeights& w, const Provenance& prov,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Exact hex-float codec used by the format.
std::string double_to_hex(double v);
double hex_to_double(const std::string& s);

}  // namespace ihlab
