#pragma once

#include <map>
#include <span>

#include "relic/arch.hpp"
#include "relic/dfg.hpp"

namespace relic {

enum class DesignMode { None, NaiveTmr, TmrFu, DwcFu, EdcFu, Mixed };
const char *design_mode_name(DesignMode m);
bool design_mode_from_name(std::string_view name, DesignMode &out);

// Triplicates every node and merges each triple with one shared voter; the
// voted value fans out to all three replicas of every consumer. Inputs stay
// single-ported, outputs are the voted values.
DataflowGraph tmr_naive(const DataflowGraph &g);

struct HardenedDesign {
    DataflowGraph dfg; // transformed for NaiveTmr, original otherwise
    DesignMode mode = DesignMode::None;
    std::vector<CellVariant> node_variant; // per node
};

// Mixed-criticality default: high -> TMR, medium -> DWC, low -> EDC cells.
CellVariant variant_for_criticality(Criticality c);

HardenedDesign assign_hardening(const DataflowGraph &g, DesignMode mode,
                                const std::map<std::string, Criticality> &overrides = {});

struct ResourceCounts {
    // (kind, variant) -> cell count
    std::map<std::pair<FuKind, CellVariant>, int> counts;

    int of(FuKind k) const; // summed over variants
    int of(FuKind k, CellVariant v) const;
    int total() const;
    void bump(FuKind k, CellVariant v, int by = 1);
    void max_with(const ResourceCounts &other);
    bool fits_in(const ResourceCounts &inventory) const;
};

ResourceCounts counts_of(const HardenedDesign &d);
// Per-kind max across kernels: kernels run alternately, not simultaneously.
ResourceCounts size_requirements(std::span<const DataflowGraph> kernels, DesignMode mode);
ResourceCounts cell_inventory(const FabricArch &arch);

// Smallest square-ish grid fitting the counts, cells filled row-major in kind
// order. Fabric mode derived from the variants present.
FabricArch minimal_fabric(const ResourceCounts &counts, int channel_width, int data_width,
                          int separation, const std::string &name);

// Same fill on a grid enlarged by extra rows/cols; replica separation needs
// headroom that the zero-slack minimal grid cannot give.
FabricArch sized_fabric(const ResourceCounts &counts, int channel_width, int data_width,
                        int separation, const std::string &name, int extra_rows, int extra_cols);

} // namespace relic
