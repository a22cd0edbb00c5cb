#pragma once

#include <set>
#include <span>
#include <vector>

#include "relic/pnr.hpp"

namespace relic {

struct FaultState {
    std::vector<int> flipped_bits;  // overlay config bits (global indices)
    std::set<CellCoord> dead_cells; // permanent faults: cell output stuck at 0
};

enum class FlagKind { Dwc, Edc };

struct CellFlag {
    CellCoord cell;
    FlagKind kind = FlagKind::Dwc;
    auto operator<=>(const CellFlag &) const = default;
};

struct SimResult {
    int latency = 0;
    bool refused = false; // e.g. driver contention after an upset
    std::string refuse_reason;
    std::vector<std::vector<Word>> outputs;       // per vector
    std::vector<std::vector<CellFlag>> flags;     // per vector, sorted
    bool any_flag() const;
};

// Cycle-level functional simulation of a configured fabric. FU outputs are
// registered (one cycle); connection and switch boxes are combinational.
// Inputs are held per vector until the pipeline settles.
SimResult simulate(const CompiledDesign &cd, std::span<const std::vector<Word>> vectors,
                   const FaultState &faults = {});

// Same, but from an explicit (possibly corrupted) configuration.
SimResult simulate_config(const CompiledDesign &cd, const FabricConfig &config,
                          std::span<const std::vector<Word>> vectors,
                          const std::set<CellCoord> &dead_cells = {});

// Flip one configuration bit in a decoded config (the cheap campaign path;
// equivalent to flipping the payload bit and re-decoding).
void flip_config_bit(FabricConfig &config, const BitstreamLayout &layout, int global_index);

enum class EquivClass { Equal, Corrupted, DetectedOnly };
const char *equiv_class_name(EquivClass c);

struct EquivalenceReport {
    EquivClass cls = EquivClass::Equal;
    int vectors = 0;
    int mismatched = 0;
    int flagged = 0;
    std::vector<uint8_t> vector_match; // 1 = output equals golden
};

// Compares a simulation run with the golden evaluator on the same vectors.
EquivalenceReport compare_golden(const SimResult &result, const DataflowGraph &golden,
                                 std::span<const std::vector<Word>> vectors);

std::vector<std::vector<Word>> random_vectors(int count, int inputs, int width, uint64_t seed);

} // namespace relic
