#pragma once

#include <set>
#include <vector>

#include "relic/bitstream.hpp"
#include "relic/harden.hpp"
#include "relic/interconnect.hpp"

namespace relic {

struct Placement {
    std::vector<CellCoord> cell_of;   // indexed by node
    std::vector<CellCoord> spare;     // compatible cells left unused
    std::set<CellCoord> excluded;     // cells the placer was told to avoid
    int64_t hpwl = 0;
    int64_t moves_evaluated = 0; // deterministic work counter

    int node_at(const HardenedDesign &d, CellCoord c) const; // -1 if unused
};

// One routed net: a driver node, its sinks, the track it occupies, the tree
// of segments, and the switch-box pair bits that stitch the tree together.
struct NetRoute {
    int driver = -1;
    std::vector<std::pair<int, int>> sinks; // (node, pin)
    int track = -1;
    std::vector<int> segments;
    struct SbBit {
        CellCoord tile;
        int track = 0;
        int pair = 0;
    };
    std::vector<SbBit> sb_bits;
};

struct Routing {
    std::vector<NetRoute> nets;
    int iterations = 0;
    int64_t wire_segments = 0;
};

// Simulated-annealing placement minimizing half-perimeter wirelength under
// kind/variant compatibility and, for triplicated designs, the minimum
// replica separation of the fabric.
Placement place(const HardenedDesign &design, const FabricArch &arch, uint64_t seed,
                const std::set<CellCoord> &excluded = {});

// Negotiated-congestion (PathFinder-style) routing over the track segments.
Routing route(const HardenedDesign &design, const Placement &placement, const FabricArch &arch,
              uint64_t seed);

Bitstream generate_bitstream(const HardenedDesign &design, const Placement &placement,
                             const Routing &routing, const FabricArch &arch,
                             const BitstreamLayout &layout);

// Checkers usable independently of the placer/router.
void check_placement(const HardenedDesign &design, const Placement &placement,
                     const FabricArch &arch);
void check_routing(const HardenedDesign &design, const Placement &placement,
                   const Routing &routing, const FabricArch &arch);

bool op_compatible_with_cell(Op op, FuKind kind);

// Nets of a design (driver node plus its consumers); route fields unset.
std::vector<NetRoute> extract_nets(const HardenedDesign &design);

struct CompiledDesign {
    FabricArch arch;
    DataflowGraph kernel; // original, pre-hardening (golden reference)
    HardenedDesign design;
    BitstreamLayout layout;
    Placement placement;
    Routing routing;
    FabricConfig config;
    Bitstream bitstream;
    uint64_t seed = 0;
};

CompiledDesign compile(const DataflowGraph &kernel, const FabricArch &arch, DesignMode mode,
                       uint64_t seed, const std::set<CellCoord> &excluded = {});

} // namespace relic
