#pragma once

#include "relic/sim.hpp"

namespace relic {

enum class RepairGranularity { FullOverlay, PerCell };
const char *repair_granularity_name(RepairGranularity g);

struct RepairPlan {
    struct Alternate {
        std::vector<CellCoord> excluded;
        std::set<CellCoord> used_cells;
        Bitstream bitstream;
        int changed_frames = 0; // vs the base bitstream
    };
    ResourceCounts spares; // unused inventory of the base compile
    std::vector<Alternate> alternates;
    RepairGranularity granularity = RepairGranularity::FullOverlay;
    double coverage = 0.0; // single-cell-fault scenarios over base used cells
    CompiledDesign base;
};

// A-priori repair: K alternate configurations, each avoiding a distinct used
// cell, exclusion order greedy over still-uncovered cells by kind scarcity.
// Every alternate is oracle-verified before inclusion.
RepairPlan precompile(const DataflowGraph &kernel, const FabricArch &arch, DesignMode mode,
                      const std::map<FuKind, int> &spare_policy, int k, uint64_t seed,
                      RepairGranularity granularity = RepairGranularity::PerCell);

double coverage(const RepairPlan &plan);

struct RepairOutcome {
    CompiledDesign compiled;
    int changed_frames = 0;
    int64_t compile_work = 0; // placer moves + router iterations
};

// Dynamic repair: re-place-and-route around diagnosed permanent faults and
// verify the result against the oracle. Throws InfeasibleError if no spare
// of a required kind remains.
RepairOutcome dynamic_repair(const DataflowGraph &kernel, const FabricArch &arch, DesignMode mode,
                             const std::set<CellCoord> &faulty, uint64_t seed);

int changed_frames(const Bitstream &a, const Bitstream &b);

} // namespace relic
