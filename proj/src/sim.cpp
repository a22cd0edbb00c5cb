#include "relic/sim.hpp"

#include <algorithm>
#include <numeric>

namespace relic {

bool SimResult::any_flag() const
{
    return std::any_of(flags.begin(), flags.end(),
                       [](const std::vector<CellFlag> &f) { return !f.empty(); });
}

const char *equiv_class_name(EquivClass c)
{
    switch (c) {
    case EquivClass::Equal: return "equal";
    case EquivClass::Corrupted: return "corrupted";
    case EquivClass::DetectedOnly: return "detected-only";
    }
    return "?";
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

int mod3(int64_t v)
{
    int r = int(v % 3);
    return r < 0 ? r + 3 : r;
}

// Exact (non-wrapping) result on sign-extended operands; the guard bits of
// the EDC check path.
int64_t exact_op(Op op, Word a, Word b, Word c, int width)
{
    const int64_t sa = to_signed(a, width), sb = to_signed(b, width);
    switch (op) {
    case Op::Mul: return sa * sb;
    case Op::Add: return sa + sb;
    case Op::Sub: return sa - sb;
    case Op::SubAbs: return sa >= sb ? sa - sb : sb - sa;
    case Op::Vote: return to_signed(apply_op(Op::Vote, a, b, c, width), width);
    }
    return 0;
}

// Residue-domain prediction of the exact result, mod 3.
int residue_prediction(Op op, Word a, Word b, Word c, int width)
{
    const int ra = mod3(to_signed(a, width)), rb = mod3(to_signed(b, width));
    switch (op) {
    case Op::Mul: return (ra * rb) % 3;
    case Op::Add: return (ra + rb) % 3;
    case Op::Sub: return mod3(ra - rb);
    case Op::SubAbs:
    case Op::Vote: return mod3(exact_op(op, a, b, c, width));
    }
    return 0;
}

struct CellSim {
    int node = -1;
    CellCoord at;
    FuKind kind = FuKind::Add;
    CellVariant variant = CellVariant::Plain;
    bool dead = false;
    const CellConfig *cfg = nullptr;
    // per-pin source: 0 = primary input, 1 = const, 2 = routed
    struct Pin {
        int source = 2;
        int input = -1;
        Word constant = 0;
        int tap_component = -1; // -1 when the select is out of range
    };
    std::vector<Pin> pins;
    int drive_component = -1;
};

} // namespace

SimResult simulate_config(const CompiledDesign &cd, const FabricConfig &config,
                          std::span<const std::vector<Word>> vectors,
                          const std::set<CellCoord> &dead_cells)
{
    const FabricArch &arch = cd.arch;
    const DataflowGraph &g = cd.design.dfg;
    const int width = g.data_width;
    const int W = arch.channel_width;
    SegmentSpace ss(arch);

    SimResult result;
    result.latency = g.depth();

    for (const std::vector<Word> &v : vectors)
        if (v.size() != g.inputs.size())
            throw InputError("input vector arity mismatch: kernel takes " +
                             std::to_string(g.inputs.size()) + " values");

    // Electrical components of the configured interconnect.
    UnionFind uf(ss.count());
    for (int row = 0; row < arch.rows; ++row) {
        for (int col = 0; col < arch.cols; ++col) {
            const auto &tracks = config.sb[size_t(row) * size_t(arch.cols) + size_t(col)];
            for (int t = 0; t < W; ++t) {
                uint8_t mask = tracks[t];
                for (int p = 0; p < 6; ++p) {
                    if (!((mask >> p) & 1))
                        continue;
                    auto sides = sb_pair_sides(p);
                    uf.unite(ss.side_segment({row, col}, sides[0], t),
                             ss.side_segment({row, col}, sides[1], t));
                }
            }
        }
    }

    // Cell models for used cells. A cell drives the interconnect only where
    // the router connected its output; sink-less outputs feed the output
    // ports directly and stay off the tracks.
    std::vector<uint8_t> node_drives(g.nodes.size(), 0);
    for (const NetRoute &net : cd.routing.nets)
        node_drives[net.driver] = 1;

    std::vector<CellSim> cells(g.nodes.size());
    std::vector<int> component_driver(ss.count(), -1); // node index
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        CellSim &cs = cells[i];
        cs.node = int(i);
        cs.at = cd.placement.cell_of[i];
        const FuCell *fc = arch.cell_at(cs.at);
        RELIC_CHECK(fc, "simulated node sits on an FU cell");
        cs.kind = fc->kind;
        cs.variant = fc->variant;
        cs.dead = dead_cells.count(cs.at) > 0;
        auto it = config.cells.find(cs.at);
        RELIC_CHECK(it != config.cells.end(), "cell config present");
        cs.cfg = &it->second;

        cs.pins.resize(g.nodes[i].args.size());
        for (size_t pin = 0; pin < g.nodes[i].args.size(); ++pin) {
            const Operand &a = g.nodes[i].args[pin];
            CellSim::Pin &ps = cs.pins[pin];
            if (a.kind == Operand::Kind::Input) {
                ps.source = 0;
                ps.input = a.index;
            } else if (a.kind == Operand::Kind::Const) {
                ps.source = 1;
                ps.constant = a.value & width_mask(width);
            } else {
                ps.source = 2;
                const uint8_t sel = pin < cs.cfg->in_select.size() ? cs.cfg->in_select[pin] : 0;
                if (sel < W)
                    ps.tap_component =
                        uf.find(ss.side_segment(cs.at, input_pin_side(int(pin)), sel));
            }
        }
        if (node_drives[i] && cs.cfg->out_select < W) {
            int seg = ss.side_segment(cs.at, output_pin_side(), cs.cfg->out_select);
            cs.drive_component = uf.find(seg);
            int &drv = component_driver[cs.drive_component];
            if (drv >= 0 && drv != int(i)) {
                result.refused = true;
                result.refuse_reason = "driver contention on a routing component";
                return result;
            }
            drv = int(i);
        }
    }

    // Per-vector settle loop: FU outputs registered, routing combinational.
    std::vector<Word> regs(g.nodes.size(), 0);
    std::vector<Word> next(g.nodes.size(), 0);
    const Word mask = width_mask(width);

    for (const std::vector<Word> &vec : vectors) {
        std::fill(regs.begin(), regs.end(), 0);
        std::set<CellFlag> flags;

        for (int cycle = 0; cycle < result.latency; ++cycle) {
            for (size_t i = 0; i < g.nodes.size(); ++i) {
                const CellSim &cs = cells[i];
                Word in[3] = {0, 0, 0};
                for (size_t pin = 0; pin < cs.pins.size(); ++pin) {
                    const CellSim::Pin &ps = cs.pins[pin];
                    if (ps.source == 0)
                        in[pin] = vec[ps.input] & mask;
                    else if (ps.source == 1)
                        in[pin] = ps.constant;
                    else if (ps.tap_component >= 0) {
                        int drv = component_driver[ps.tap_component];
                        in[pin] = drv >= 0 ? regs[drv] : 0;
                    }
                }

                if (cs.dead) {
                    next[i] = 0;
                    continue;
                }

                auto fn = [&](uint8_t raw) -> Word {
                    Op op;
                    if (!effective_op(cs.kind, raw, op))
                        return 0;
                    return apply_op(op, in[0], in[1], in[2], width);
                };

                switch (cs.variant) {
                case CellVariant::Plain:
                    next[i] = fn(cs.cfg->opcode[0]);
                    break;
                case CellVariant::Tmr: {
                    Word r0 = fn(cs.cfg->opcode[0]);
                    Word r1 = fn(cs.cfg->opcode[1]);
                    Word r2 = fn(cs.cfg->opcode[2]);
                    next[i] = (r0 & r1) | (r0 & r2) | (r1 & r2);
                    break;
                }
                case CellVariant::Dwc: {
                    Word r0 = fn(cs.cfg->opcode[0]);
                    Word r1 = fn(cs.cfg->opcode[1]);
                    next[i] = r0;
                    if (r0 != r1)
                        flags.insert({cs.at, FlagKind::Dwc});
                    break;
                }
                case CellVariant::Edc: {
                    Op op;
                    if (!effective_op(cs.kind, cs.cfg->opcode[0], op)) {
                        next[i] = 0;
                        break;
                    }
                    next[i] = apply_op(op, in[0], in[1], in[2], width);
                    if (cs.cfg->checker_enable & 0x3) {
                        int64_t exact = exact_op(op, in[0], in[1], in[2], width);
                        if (mod3(exact) != residue_prediction(op, in[0], in[1], in[2], width))
                            flags.insert({cs.at, FlagKind::Edc});
                    }
                    break;
                }
                }
            }
            std::swap(regs, next);
        }

        std::vector<Word> out;
        out.reserve(g.outputs.size());
        for (const OutputPort &port : g.outputs)
            out.push_back(regs[port.node]);
        result.outputs.push_back(std::move(out));
        result.flags.emplace_back(flags.begin(), flags.end());
    }
    return result;
}

void flip_config_bit(FabricConfig &config, const BitstreamLayout &layout, int global_index)
{
    const Field &f = layout.fields[layout.field_of(global_index)];
    const int bit = global_index - f.global_start;
    switch (f.type) {
    case FieldType::Opcode:
        config.cells.at(f.cell).opcode[f.replica < 0 ? 0 : f.replica] ^= uint8_t(1) << bit;
        break;
    case FieldType::CheckerEnable:
        config.cells.at(f.cell).checker_enable ^= uint8_t(1) << bit;
        break;
    case FieldType::CbIn:
        config.cells.at(f.cell).in_select[f.pin] ^= uint8_t(1) << bit;
        break;
    case FieldType::CbOut:
        config.cells.at(f.cell).out_select ^= uint8_t(1) << bit;
        break;
    case FieldType::Sb:
        config.sb[size_t(f.cell.row) * size_t(layout.cols) + size_t(f.cell.col)][f.track] ^=
            uint8_t(1) << bit;
        break;
    }
}

SimResult simulate(const CompiledDesign &cd, std::span<const std::vector<Word>> vectors,
                   const FaultState &faults)
{
    if (faults.flipped_bits.empty() && faults.dead_cells.empty())
        return simulate_config(cd, cd.config, vectors, {});
    FabricConfig cfg = cd.config;
    for (int bit : faults.flipped_bits)
        flip_config_bit(cfg, cd.layout, bit);
    return simulate_config(cd, cfg, vectors, faults.dead_cells);
}

EquivalenceReport compare_golden(const SimResult &result, const DataflowGraph &golden,
                                 std::span<const std::vector<Word>> vectors)
{
    EquivalenceReport rep;
    rep.vectors = int(vectors.size());
    if (result.refused) {
        rep.cls = EquivClass::Corrupted;
        rep.mismatched = rep.vectors;
        rep.vector_match.assign(vectors.size(), 0);
        return rep;
    }
    RELIC_CHECK(result.outputs.size() == vectors.size(), "simulation covered every vector");
    bool any_flag = false;
    for (size_t v = 0; v < vectors.size(); ++v) {
        std::vector<Word> want = eval_dfg(golden, vectors[v]);
        bool match = want == result.outputs[v];
        rep.vector_match.push_back(match ? 1 : 0);
        if (!match)
            ++rep.mismatched;
        if (!result.flags[v].empty()) {
            ++rep.flagged;
            any_flag = true;
        }
    }
    if (any_flag)
        rep.cls = EquivClass::DetectedOnly;
    else if (rep.mismatched > 0)
        rep.cls = EquivClass::Corrupted;
    else
        rep.cls = EquivClass::Equal;
    return rep;
}

std::vector<std::vector<Word>> random_vectors(int count, int inputs, int width, uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::vector<Word>> out(count);
    for (auto &vec : out) {
        vec.resize(inputs);
        for (Word &w : vec)
            w = Word(rng()) & width_mask(width);
    }
    return out;
}

} // namespace relic
