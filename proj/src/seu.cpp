#include "relic/seu.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>
#include <thread>

namespace relic {

const char *bit_class_name(BitClass c)
{
    switch (c) {
    case BitClass::Benign: return "benign";
    case BitClass::Detected: return "detected";
    case BitClass::Sdc: return "sdc";
    }
    return "?";
}

Bitstream inject(const Bitstream &bits, std::span<const int> flip, const BitstreamLayout &layout)
{
    Bitstream out = bits;
    for (int b : flip)
        out.flip_bit(layout, b); // stale check bits by design
    return out;
}

std::optional<BitClass> SensitivityMap::class_of(int bit) const
{
    auto it = std::lower_bound(entries.begin(), entries.end(), bit,
                               [](const Entry &e, int b) { return e.bit < b; });
    if (it == entries.end() || it->bit != bit)
        return std::nullopt;
    return it->cls;
}

std::map<std::pair<BitKind, BitClass>, int>
SensitivityMap::totals(const BitstreamLayout &layout) const
{
    std::map<std::pair<BitKind, BitClass>, int> t;
    for (const Entry &e : entries)
        ++t[{layout.bit(e.bit).kind, e.cls}];
    return t;
}

namespace {

std::vector<int> scope_bits(const CampaignScope &scope, const BitstreamLayout &layout,
                            uint64_t seed)
{
    std::vector<int> bits;
    switch (scope.kind) {
    case CampaignScope::Kind::All:
        bits.resize(layout.total_bits);
        for (int i = 0; i < layout.total_bits; ++i)
            bits[i] = i;
        break;
    case CampaignScope::Kind::Random: {
        if (scope.sample >= layout.total_bits) {
            return scope_bits(CampaignScope::all(), layout, seed);
        }
        Rng rng(seed ^ 0x5eed5eedULL);
        std::set<int> picked;
        while (int(picked.size()) < scope.sample)
            picked.insert(int(rng() % uint64_t(layout.total_bits)));
        bits.assign(picked.begin(), picked.end());
        break;
    }
    case CampaignScope::Kind::ResourceFilter:
        for (int i = 0; i < layout.total_bits; ++i)
            if (layout.bit(i).kind == scope.filter)
                bits.push_back(i);
        break;
    case CampaignScope::Kind::List:
        bits = scope.bits;
        std::sort(bits.begin(), bits.end());
        bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
        for (int b : bits)
            if (b < 0 || b >= layout.total_bits)
                throw InputError("campaign bit " + std::to_string(b) + " out of range");
        break;
    }
    return bits;
}

std::string scope_name(const CampaignScope &scope)
{
    switch (scope.kind) {
    case CampaignScope::Kind::All: return "all";
    case CampaignScope::Kind::Random: return "random:" + std::to_string(scope.sample);
    case CampaignScope::Kind::ResourceFilter:
        return std::string("kind:") + bit_kind_name(scope.filter);
    case CampaignScope::Kind::List: return "list:" + std::to_string(scope.bits.size());
    }
    return "?";
}

BitClass classify_flip(const CompiledDesign &cd, int bit,
                       std::span<const std::vector<Word>> vectors,
                       const std::vector<std::vector<Word>> &golden)
{
    FabricConfig cfg = cd.config;
    flip_config_bit(cfg, cd.layout, bit);
    SimResult r = simulate_config(cd, cfg, vectors, {});
    if (r.refused)
        return BitClass::Sdc; // unresolvable electrical state counts as corruption
    bool flagged = false, wrong = false;
    for (size_t v = 0; v < vectors.size(); ++v) {
        if (!r.flags[v].empty())
            flagged = true;
        if (r.outputs[v] != golden[v])
            wrong = true;
    }
    if (flagged)
        return BitClass::Detected;
    return wrong ? BitClass::Sdc : BitClass::Benign;
}

} // namespace

SensitivityMap run_campaign(const CompiledDesign &cd,
                            std::span<const std::vector<Word>> vectors, const CampaignScope &scope,
                            uint64_t seed, int jobs)
{
    if (vectors.empty())
        throw InputError("campaign needs at least one input vector");

    std::vector<std::vector<Word>> golden;
    golden.reserve(vectors.size());
    for (const auto &v : vectors)
        golden.push_back(eval_dfg(cd.kernel, v));

    // Abort early when the fault-free design is already broken.
    {
        SimResult base = simulate(cd, vectors);
        if (base.refused || base.any_flag())
            throw InternalError("campaign baseline raised flags or refused");
        for (size_t v = 0; v < vectors.size(); ++v)
            if (base.outputs[v] != golden[v])
                throw InternalError("campaign baseline does not match the golden evaluator");
    }

    std::vector<int> bits = scope_bits(scope, cd.layout, seed);
    SensitivityMap map;
    map.vectors = int(vectors.size());
    map.seed = seed;
    map.scope = scope_name(scope);
    map.simulations = int64_t(bits.size()) * int64_t(vectors.size());
    map.entries.resize(bits.size());

    jobs = std::max(1, jobs);
    if (jobs == 1 || bits.size() < 2) {
        for (size_t i = 0; i < bits.size(); ++i)
            map.entries[i] = {bits[i], classify_flip(cd, bits[i], vectors, golden)};
        return map;
    }

    // Independent pure evaluations; results merged by ascending bit index.
    std::vector<std::thread> pool;
    std::atomic<size_t> cursor{0};
    for (int j = 0; j < jobs; ++j) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = cursor.fetch_add(1);
                if (i >= bits.size())
                    return;
                map.entries[i] = {bits[i], classify_flip(cd, bits[i], vectors, golden)};
            }
        });
    }
    for (std::thread &t : pool)
        t.join();
    return map;
}

std::string sensitivity_csv(const SensitivityMap &map, const BitstreamLayout &layout)
{
    std::ostringstream os;
    os << "bit_index,frame,offset,resource_kind,row,col,class\n";
    for (const SensitivityMap::Entry &e : map.entries) {
        BitInfo b = layout.bit(e.bit);
        os << e.bit << "," << b.frame << "," << b.offset << ","
           << bit_kind_name(b.kind, b.replica) << "," << b.cell.row << "," << b.cell.col << ","
           << bit_class_name(e.cls) << "\n";
    }
    return os.str();
}

int adjacent_replica_conflicts(const HardenedDesign &design, const Placement &placement)
{
    const DataflowGraph &g = design.dfg;
    int conflicts = 0;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.nodes[i].replica < 0)
            continue;
        for (size_t j = i + 1; j < g.nodes.size(); ++j) {
            if (g.nodes[j].replica < 0 || g.nodes[j].origin != g.nodes[i].origin ||
                g.nodes[j].replica == g.nodes[i].replica)
                continue;
            if (chebyshev(placement.cell_of[i], placement.cell_of[j]) <= 1)
                ++conflicts;
        }
    }
    return conflicts;
}

int static_cost(FuKind kind)
{
    switch (kind) {
    case FuKind::Mul: return 600;
    case FuKind::Add: return 150;
    case FuKind::Sub: return 180; // subtractor datapath, same class as subabs
    case FuKind::SubAbs: return 180;
    case FuKind::Vote: return 60;
    }
    return 0;
}

std::vector<uint8_t> essential_upper_bits(const BitstreamLayout &layout,
                                          const HardenedDesign &design,
                                          const Placement &placement, const Bitstream &bitstream)
{
    std::set<CellCoord> used(placement.cell_of.begin(), placement.cell_of.end());
    std::vector<uint8_t> essential(layout.total_bits, 0);
    for (const Field &f : layout.fields) {
        for (int i = 0; i < f.width; ++i) {
            const int bit = f.global_start + i;
            if (f.type == FieldType::Sb)
                essential[bit] = bitstream.get_bit(layout, bit) ? 1 : 0;
            else
                essential[bit] = used.count(f.cell) ? 1 : 0;
        }
    }
    (void)design;
    return essential;
}

DeviceModel build_device_model(const FabricArch &arch, const BitstreamLayout &layout,
                               const HardenedDesign &design, const Placement &placement,
                               const Bitstream &bitstream, int frame_multiple)
{
    if (frame_multiple < 10)
        throw InputError("device model needs at least 10 frames per overlay frame");

    std::set<CellCoord> used(placement.cell_of.begin(), placement.cell_of.end());
    std::vector<uint8_t> essential = essential_upper_bits(layout, design, placement, bitstream);

    // Per overlay column: static bits of its cells, then images of its frame.
    std::vector<std::vector<DeviceBit>> column(arch.cols);
    for (int col = 0; col < arch.cols; ++col) {
        for (int row = 0; row < arch.rows; ++row) {
            CellCoord coord{row, col};
            const FuCell *cell = arch.cell_at(coord);
            if (!cell)
                continue;
            const bool ess = used.count(coord) > 0;
            for (int k = 0; k < static_cost(cell->kind); ++k)
                column[col].push_back({DeviceBit::Kind::Static, coord, -1, ess});
        }
        const int begin = layout.frame_global_begin[col];
        for (int off = 0; off < layout.frame_bits[col]; ++off) {
            const int bit = begin + off;
            column[col].push_back(
                {DeviceBit::Kind::ConfigImage, layout.bit(bit).cell, bit, essential[bit] != 0});
        }
    }

    size_t max_len = 1;
    for (const auto &c : column)
        max_len = std::max(max_len, c.size());

    DeviceModel model;
    model.frame_count = arch.cols * frame_multiple;
    const size_t per_frame = (max_len + size_t(frame_multiple) - 1) / size_t(frame_multiple);
    model.bits_per_frame = int((per_frame + 63) / 64) * 64;
    model.bits_per_frame = std::max(model.bits_per_frame, 64);
    model.frame_essential.assign(model.frame_count, 0);

    for (int col = 0; col < arch.cols; ++col) {
        for (size_t slot = 0; slot < column[col].size(); ++slot) {
            const int frame = col * frame_multiple + int(slot / size_t(model.bits_per_frame));
            const int offset = int(slot % size_t(model.bits_per_frame));
            model.bit_location.push_back({frame, offset});
            model.frame_essential[frame] |= column[col][slot].essential ? 1 : 0;
            model.bits.push_back(column[col][slot]);
        }
    }
    return model;
}

std::vector<BitClass> lower_sensitivity(const DeviceModel &model, const SensitivityMap &upper)
{
    std::vector<BitClass> out(model.bits.size(), BitClass::Benign);
    for (size_t i = 0; i < model.bits.size(); ++i) {
        const DeviceBit &b = model.bits[i];
        if (b.kind == DeviceBit::Kind::Static)
            out[i] = b.essential ? BitClass::Sdc : BitClass::Benign;
        else if (auto cls = upper.class_of(b.overlay_bit))
            out[i] = *cls;
    }
    return out;
}

} // namespace relic
