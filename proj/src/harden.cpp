#include "relic/harden.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace relic {

const char *design_mode_name(DesignMode m)
{
    switch (m) {
    case DesignMode::None: return "none";
    case DesignMode::NaiveTmr: return "naive_tmr";
    case DesignMode::TmrFu: return "tmr_fu";
    case DesignMode::DwcFu: return "dwc_fu";
    case DesignMode::EdcFu: return "edc_fu";
    case DesignMode::Mixed: return "mixed";
    }
    return "?";
}

bool design_mode_from_name(std::string_view name, DesignMode &out)
{
    struct Alias {
        std::string_view name;
        DesignMode mode;
    };
    static constexpr Alias aliases[] = {
        {"none", DesignMode::None},     {"naive_tmr", DesignMode::NaiveTmr},
        {"naive", DesignMode::NaiveTmr}, {"tmr_fu", DesignMode::TmrFu},
        {"tmrfu", DesignMode::TmrFu},   {"dwc_fu", DesignMode::DwcFu},
        {"dwcfu", DesignMode::DwcFu},   {"edc_fu", DesignMode::EdcFu},
        {"edcfu", DesignMode::EdcFu},   {"mixed", DesignMode::Mixed},
    };
    for (const Alias &a : aliases) {
        if (name == a.name) {
            out = a.mode;
            return true;
        }
    }
    return false;
}

DataflowGraph tmr_naive(const DataflowGraph &g)
{
    for (const DfgNode &n : g.nodes)
        if (n.op == Op::Vote)
            throw InputError("tmr_naive: kernel '" + g.name + "' already contains vote nodes");

    DataflowGraph out;
    out.name = g.name + "_tmr";
    out.data_width = g.data_width;
    out.inputs = g.inputs; // shared fan-out, not triplicated

    // voter_of[i] = index of the vote node merging the triple of original node i
    std::vector<int> voter_of(g.nodes.size(), -1);

    for (size_t i = 0; i < g.nodes.size(); ++i) {
        const DfgNode &n = g.nodes[i];
        std::array<int, 3> rep{};
        for (int k = 0; k < 3; ++k) {
            DfgNode r;
            r.id = n.id + "_r" + std::to_string(k);
            r.op = n.op;
            r.crit = n.crit;
            r.replica = k;
            r.origin = int(i);
            for (const Operand &a : n.args) {
                if (a.kind == Operand::Kind::Node)
                    r.args.push_back(Operand::node(voter_of[a.index]));
                else
                    r.args.push_back(a);
            }
            rep[k] = int(out.nodes.size());
            out.nodes.push_back(std::move(r));
        }
        DfgNode v;
        v.id = n.id + "_v";
        v.op = Op::Vote;
        v.crit = n.crit;
        v.origin = int(i);
        v.args = {Operand::node(rep[0]), Operand::node(rep[1]), Operand::node(rep[2])};
        voter_of[i] = int(out.nodes.size());
        out.nodes.push_back(std::move(v));
    }
    for (const OutputPort &o : g.outputs)
        out.outputs.push_back({o.id, voter_of[o.node]});
    out.validate();
    return out;
}

CellVariant variant_for_criticality(Criticality c)
{
    switch (c) {
    case Criticality::High: return CellVariant::Tmr;
    case Criticality::Medium: return CellVariant::Dwc;
    case Criticality::Low: return CellVariant::Edc;
    }
    return CellVariant::Tmr;
}

HardenedDesign assign_hardening(const DataflowGraph &g, DesignMode mode,
                                const std::map<std::string, Criticality> &overrides)
{
    for (const auto &[id, crit] : overrides) {
        (void)crit;
        if (g.node_index(id) < 0)
            throw InputError("criticality override for unknown node '" + id + "'");
    }

    HardenedDesign d;
    d.mode = mode;
    if (mode == DesignMode::NaiveTmr) {
        d.dfg = tmr_naive(g);
        d.node_variant.assign(d.dfg.nodes.size(), CellVariant::Plain);
        return d;
    }
    d.dfg = g;
    d.node_variant.resize(g.nodes.size());
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        switch (mode) {
        case DesignMode::None:
            d.node_variant[i] = CellVariant::Plain;
            break;
        case DesignMode::TmrFu:
            d.node_variant[i] = CellVariant::Tmr;
            break;
        case DesignMode::DwcFu:
            d.node_variant[i] = CellVariant::Dwc;
            break;
        case DesignMode::EdcFu:
            d.node_variant[i] = CellVariant::Edc;
            break;
        case DesignMode::Mixed: {
            Criticality c = g.nodes[i].crit;
            if (auto it = overrides.find(g.nodes[i].id); it != overrides.end())
                c = it->second;
            d.node_variant[i] = variant_for_criticality(c);
            break;
        }
        case DesignMode::NaiveTmr:
            break;
        }
    }
    return d;
}

int ResourceCounts::of(FuKind k) const
{
    int n = 0;
    for (const auto &[key, count] : counts)
        if (key.first == k)
            n += count;
    return n;
}

int ResourceCounts::of(FuKind k, CellVariant v) const
{
    auto it = counts.find({k, v});
    return it == counts.end() ? 0 : it->second;
}

int ResourceCounts::total() const
{
    int n = 0;
    for (const auto &[key, count] : counts)
        n += count;
    return n;
}

void ResourceCounts::bump(FuKind k, CellVariant v, int by) { counts[{k, v}] += by; }

void ResourceCounts::max_with(const ResourceCounts &other)
{
    for (const auto &[key, count] : other.counts) {
        int &mine = counts[key];
        mine = std::max(mine, count);
    }
}

bool ResourceCounts::fits_in(const ResourceCounts &inventory) const
{
    for (const auto &[key, count] : counts)
        if (count > inventory.of(key.first, key.second))
            return false;
    return true;
}

ResourceCounts counts_of(const HardenedDesign &d)
{
    ResourceCounts rc;
    for (size_t i = 0; i < d.dfg.nodes.size(); ++i)
        rc.bump(fu_kind_for_op(d.dfg.nodes[i].op), d.node_variant[i]);
    return rc;
}

ResourceCounts size_requirements(std::span<const DataflowGraph> kernels, DesignMode mode)
{
    if (kernels.empty())
        throw InputError("size_requirements: no kernels given");
    ResourceCounts rc;
    for (const DataflowGraph &k : kernels)
        rc.max_with(counts_of(assign_hardening(k, mode)));
    return rc;
}

ResourceCounts cell_inventory(const FabricArch &arch)
{
    ResourceCounts rc;
    for (const auto &[coord, cell] : arch.cells)
        rc.bump(cell.kind, cell.variant);
    return rc;
}

FabricArch minimal_fabric(const ResourceCounts &counts, int channel_width, int data_width,
                          int separation, const std::string &name)
{
    return sized_fabric(counts, channel_width, data_width, separation, name, 0, 0);
}

FabricArch sized_fabric(const ResourceCounts &counts, int channel_width, int data_width,
                        int separation, const std::string &name, int extra_rows, int extra_cols)
{
    const int n = counts.total();
    if (n == 0)
        throw InputError("minimal_fabric: empty resource counts");
    FabricArch a;
    a.name = name;
    a.rows = int(std::ceil(std::sqrt(double(n)))) + extra_rows;
    a.cols = (n + a.rows - 1) / a.rows + extra_cols;
    a.channel_width = channel_width;
    a.data_width = data_width;
    a.separation = separation;

    bool any_plain = false, any_hardened = false;
    std::set<CellVariant> variants;
    for (const auto &[key, count] : counts.counts) {
        if (count == 0)
            continue;
        variants.insert(key.second);
        (key.second == CellVariant::Plain ? any_plain : any_hardened) = true;
    }
    if (variants.size() > 1 || (any_plain && any_hardened))
        a.mode = FabricMode::Mixed;
    else if (variants.count(CellVariant::Tmr))
        a.mode = FabricMode::TmrFu;
    else if (variants.count(CellVariant::Dwc))
        a.mode = FabricMode::DwcFu;
    else if (variants.count(CellVariant::Edc))
        a.mode = FabricMode::EdcFu;
    else
        a.mode = FabricMode::Plain;

    // Deal cells round-robin over the kinds in row-major position order; the
    // interleave keeps same-kind cells apart, which replica separation needs.
    std::vector<std::pair<std::pair<FuKind, CellVariant>, int>> remaining;
    for (FuKind k : {FuKind::Mul, FuKind::Add, FuKind::Sub, FuKind::SubAbs, FuKind::Vote})
        for (CellVariant v :
             {CellVariant::Plain, CellVariant::Tmr, CellVariant::Dwc, CellVariant::Edc})
            if (counts.of(k, v) > 0)
                remaining.push_back({{k, v}, counts.of(k, v)});

    int at = 0;
    size_t next = 0;
    int left = n;
    while (left > 0) {
        while (remaining[next % remaining.size()].second == 0)
            ++next;
        auto &[key, count] = remaining[next % remaining.size()];
        CellCoord coord{at / a.cols, at % a.cols};
        a.cells[coord] = FuCell{key.first, key.second};
        --count;
        --left;
        ++at;
        ++next;
    }
    a.validate();
    return a;
}

} // namespace relic
