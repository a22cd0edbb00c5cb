#include "relic/pnr.hpp"

namespace relic {

Bitstream generate_bitstream(const HardenedDesign &design, const Placement &placement,
                             const Routing &routing, const FabricArch &arch,
                             const BitstreamLayout &layout)
{
    FabricConfig cfg = empty_config(arch);

    for (size_t i = 0; i < design.dfg.nodes.size(); ++i) {
        CellCoord at = placement.cell_of[i];
        const FuCell *cell = arch.cell_at(at);
        if (!cell)
            throw InputError("placement references a tile without an FU");
        CellConfig &cc = cfg.cells.at(at);
        const uint8_t opc = opcode_for_op(design.dfg.nodes[i].op);
        switch (cell->variant) {
        case CellVariant::Tmr:
            cc.opcode = {opc, opc, opc}; // one copy per internal replica
            break;
        case CellVariant::Dwc:
            cc.opcode = {opc, opc, 0};
            break;
        case CellVariant::Edc:
            cc.opcode = {opc, 0, 0};
            cc.checker_enable = 0x3; // both redundant checkers on
            break;
        case CellVariant::Plain:
            cc.opcode = {opc, 0, 0};
            break;
        }
    }

    for (const NetRoute &net : routing.nets) {
        cfg.cells.at(placement.cell_of[net.driver]).out_select = uint8_t(net.track);
        for (auto &[node, pin] : net.sinks)
            cfg.cells.at(placement.cell_of[node]).in_select[pin] = uint8_t(net.track);
        for (const NetRoute::SbBit &bit : net.sb_bits)
            cfg.sb[size_t(bit.tile.row) * size_t(arch.cols) + size_t(bit.tile.col)][bit.track] |=
                uint8_t(1) << bit.pair;
    }

    return encode_config(layout, cfg);
}

CompiledDesign compile(const DataflowGraph &kernel, const FabricArch &arch, DesignMode mode,
                       uint64_t seed, const std::set<CellCoord> &excluded)
{
    CompiledDesign cd;
    cd.arch = arch;
    cd.kernel = kernel;
    cd.seed = seed;
    cd.design = assign_hardening(kernel, mode);
    cd.layout = bit_layout(arch);
    cd.placement = place(cd.design, arch, seed, excluded);
    cd.routing = route(cd.design, cd.placement, arch, seed);
    cd.bitstream = generate_bitstream(cd.design, cd.placement, cd.routing, arch, cd.layout);

    DecodeReport report;
    cd.config = decode_bitstream(cd.layout, cd.bitstream, &report);
    RELIC_CHECK(report.clean(), "fresh bitstream has zero syndromes");
    RELIC_CHECK(encode_config(cd.layout, cd.config) == cd.bitstream,
                "bitstream round-trips through decode");
    return cd;
}

} // namespace relic
