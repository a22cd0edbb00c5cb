#include "relic/repair.hpp"

#include <algorithm>

namespace relic {

const char *repair_granularity_name(RepairGranularity g)
{
    return g == RepairGranularity::FullOverlay ? "full_overlay" : "per_cell";
}

int changed_frames(const Bitstream &a, const Bitstream &b)
{
    RELIC_CHECK(a.frames.size() == b.frames.size(), "bitstreams cover the same fabric");
    int n = 0;
    for (size_t f = 0; f < a.frames.size(); ++f)
        if (!(a.frames[f].words == b.frames[f].words))
            ++n;
    return n;
}

namespace {

void verify_against_oracle(const CompiledDesign &cd, uint64_t seed)
{
    auto vectors = random_vectors(256, int(cd.kernel.inputs.size()), cd.kernel.data_width,
                                  seed ^ 0xfacadeULL);
    SimResult r = simulate(cd, vectors);
    EquivalenceReport rep = compare_golden(r, cd.kernel, vectors);
    if (rep.cls != EquivClass::Equal)
        throw InternalError("repaired configuration is not equivalent to the oracle");
}

// Used cells ordered for exclusion: scarcest kind first (fewest spares, most
// used on a tie), then row-major.
std::vector<CellCoord> scarcity_order(const CompiledDesign &base)
{
    ResourceCounts used_counts = counts_of(base.design);
    ResourceCounts inventory = cell_inventory(base.arch);

    std::vector<CellCoord> used(base.placement.cell_of.begin(), base.placement.cell_of.end());
    std::sort(used.begin(), used.end());
    std::stable_sort(used.begin(), used.end(), [&](CellCoord a, CellCoord b) {
        const FuCell *ca = base.arch.cell_at(a);
        const FuCell *cb = base.arch.cell_at(b);
        const int spare_a = inventory.of(ca->kind, ca->variant) - used_counts.of(ca->kind, ca->variant);
        const int spare_b = inventory.of(cb->kind, cb->variant) - used_counts.of(cb->kind, cb->variant);
        if (spare_a != spare_b)
            return spare_a < spare_b;
        const int used_a = used_counts.of(ca->kind, ca->variant);
        const int used_b = used_counts.of(cb->kind, cb->variant);
        if (used_a != used_b)
            return used_a > used_b;
        return false; // keep row-major order
    });
    return used;
}

} // namespace

RepairPlan precompile(const DataflowGraph &kernel, const FabricArch &arch, DesignMode mode,
                      const std::map<FuKind, int> &spare_policy, int k, uint64_t seed,
                      RepairGranularity granularity)
{
    if (k < 0)
        throw InputError("precompiled configuration count must be >= 0");

    RepairPlan plan;
    plan.granularity = granularity;
    plan.base = compile(kernel, arch, mode, seed);

    ResourceCounts used_counts = counts_of(plan.base.design);
    ResourceCounts inventory = cell_inventory(arch);
    for (const auto &[kind, want] : spare_policy) {
        int spare = inventory.of(kind) - used_counts.of(kind);
        if (spare < want)
            throw InfeasibleError(std::string("not enough spare ") + fu_kind_name(kind) +
                                  " cells: have " + std::to_string(spare) + ", policy wants " +
                                  std::to_string(want));
    }
    for (const auto &[key, have] : inventory.counts)
        plan.spares.counts[key] = have - used_counts.of(key.first, key.second);

    const std::vector<CellCoord> order = scarcity_order(plan.base);
    if (k > int(order.size()))
        throw InputError("requested " + std::to_string(k) + " configurations but only " +
                         std::to_string(order.size()) + " distinct exclusion sets exist");

    std::set<CellCoord> covered; // base-used cells avoided by some alternate
    std::set<CellCoord> already_excluded;
    for (int i = 0; i < k; ++i) {
        // greedy: exclude the first still-uncovered used cell in scarcity
        // order; once everything is covered, continue round-robin over the
        // remaining distinct exclusion sets
        CellCoord target = order[0];
        bool found = false;
        for (const CellCoord &c : order) {
            if (!covered.count(c) && !already_excluded.count(c)) {
                target = c;
                found = true;
                break;
            }
        }
        if (!found) {
            for (const CellCoord &c : order) {
                if (!already_excluded.count(c)) {
                    target = c;
                    break;
                }
            }
        }
        already_excluded.insert(target);
        CompiledDesign alt = compile(kernel, arch, mode, seed, {target});
        verify_against_oracle(alt, seed + uint64_t(i) + 1);

        RepairPlan::Alternate a;
        a.excluded = {target};
        a.used_cells.insert(alt.placement.cell_of.begin(), alt.placement.cell_of.end());
        RELIC_CHECK(!a.used_cells.count(target), "alternate avoids its excluded cell");
        a.bitstream = alt.bitstream;
        a.changed_frames = granularity == RepairGranularity::FullOverlay
                               ? int(plan.base.bitstream.frames.size())
                               : changed_frames(plan.base.bitstream, alt.bitstream);
        plan.alternates.push_back(std::move(a));

        for (const CellCoord &c : order)
            if (!plan.alternates.back().used_cells.count(c))
                covered.insert(c);
    }
    plan.coverage = coverage(plan);
    return plan;
}

double coverage(const RepairPlan &plan)
{
    const auto &cells = plan.base.placement.cell_of;
    if (cells.empty())
        return 0.0;
    std::set<CellCoord> used(cells.begin(), cells.end());
    int covered = 0;
    for (const CellCoord &c : used) {
        for (const RepairPlan::Alternate &a : plan.alternates) {
            if (!a.used_cells.count(c)) {
                ++covered;
                break;
            }
        }
    }
    return double(covered) / double(used.size());
}

RepairOutcome dynamic_repair(const DataflowGraph &kernel, const FabricArch &arch, DesignMode mode,
                             const std::set<CellCoord> &faulty, uint64_t seed)
{
    RepairOutcome out;
    out.compiled = compile(kernel, arch, mode, seed, faulty);
    verify_against_oracle(out.compiled, seed);
    out.compile_work =
        out.compiled.placement.moves_evaluated + int64_t(out.compiled.routing.iterations);
    CompiledDesign base = compile(kernel, arch, mode, seed);
    out.changed_frames = changed_frames(base.bitstream, out.compiled.bitstream);
    return out;
}

} // namespace relic
