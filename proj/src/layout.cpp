#include "relic/layout.hpp"

#include <algorithm>

namespace relic {

const char *bit_kind_name(BitKind k, int replica)
{
    switch (k) {
    case BitKind::FuOp: return "fu_op";
    case BitKind::FuReplica:
        switch (replica) {
        case 0: return "fu_replica0";
        case 1: return "fu_replica1";
        case 2: return "fu_replica2";
        default: return "fu_replica";
        }
    case BitKind::CbSelect: return "cb_select";
    case BitKind::SbSwitch: return "sb_switch";
    }
    return "?";
}

BitKind Field::bit_kind() const
{
    switch (type) {
    case FieldType::Opcode: return replica >= 0 ? BitKind::FuReplica : BitKind::FuOp;
    case FieldType::CheckerEnable: return BitKind::FuOp;
    case FieldType::CbIn:
    case FieldType::CbOut: return BitKind::CbSelect;
    case FieldType::Sb: return BitKind::SbSwitch;
    }
    return BitKind::SbSwitch;
}

namespace {

int opcode_copies(CellVariant v)
{
    switch (v) {
    case CellVariant::Tmr: return 3;
    case CellVariant::Dwc: return 2;
    default: return 1;
    }
}

} // namespace

BitstreamLayout bit_layout(const FabricArch &arch)
{
    arch.validate();
    BitstreamLayout lay;
    lay.rows = arch.rows;
    lay.cols = arch.cols;
    lay.channel_width = arch.channel_width;
    lay.cb_select_bits = ceil_log2(arch.channel_width);
    lay.fabric_hash = arch.hash();

    int global = 0;
    for (int col = 0; col < arch.cols; ++col) {
        lay.frame_field_begin.push_back(int(lay.fields.size()));
        lay.frame_global_begin.push_back(global);
        int offset = 0;
        auto push = [&](Field f) {
            f.global_start = global;
            f.frame = col;
            f.frame_offset = offset;
            global += f.width;
            offset += f.width;
            lay.fields.push_back(f);
        };
        for (int row = 0; row < arch.rows; ++row) {
            CellCoord coord{row, col};
            if (const FuCell *cell = arch.cell_at(coord)) {
                const int copies = opcode_copies(cell->variant);
                const bool tag_replicas = copies > 1;
                for (int k = 0; k < copies; ++k) {
                    Field f;
                    f.type = FieldType::Opcode;
                    f.cell = coord;
                    f.replica = tag_replicas ? k : -1;
                    f.width = 4;
                    push(f);
                }
                if (cell->variant == CellVariant::Edc) {
                    Field f;
                    f.type = FieldType::CheckerEnable;
                    f.cell = coord;
                    f.width = 2;
                    push(f);
                }
                if (lay.cb_select_bits > 0) {
                    for (int pin = 0; pin < cell_input_pins(cell->kind); ++pin) {
                        Field f;
                        f.type = FieldType::CbIn;
                        f.cell = coord;
                        f.pin = pin;
                        f.width = lay.cb_select_bits;
                        push(f);
                    }
                    Field f;
                    f.type = FieldType::CbOut;
                    f.cell = coord;
                    f.width = lay.cb_select_bits;
                    push(f);
                }
            }
            for (int track = 0; track < arch.channel_width; ++track) {
                Field f;
                f.type = FieldType::Sb;
                f.cell = coord;
                f.track = track;
                f.width = 6;
                push(f);
            }
        }
        lay.frame_bits.push_back(offset);
        lay.frame_words.push_back((offset + 63) / 64);
    }
    lay.frame_field_begin.push_back(int(lay.fields.size()));
    lay.total_bits = global;
    return lay;
}

int BitstreamLayout::field_of(int global_index) const
{
    if (global_index < 0 || global_index >= total_bits)
        throw InputError("config bit index " + std::to_string(global_index) + " out of range");
    auto it = std::upper_bound(fields.begin(), fields.end(), global_index,
                               [](int v, const Field &f) { return v < f.global_start; });
    return int(it - fields.begin()) - 1;
}

BitInfo BitstreamLayout::bit(int global_index) const
{
    const int fi = field_of(global_index);
    const Field &f = fields[fi];
    BitInfo info;
    info.global_index = global_index;
    info.frame = f.frame;
    info.offset = f.frame_offset + (global_index - f.global_start);
    info.kind = f.bit_kind();
    info.replica = f.type == FieldType::Opcode ? f.replica : -1;
    info.cell = f.cell;
    info.field = fi;
    return info;
}

int BitstreamLayout::global_of(int frame, int offset) const
{
    if (frame < 0 || frame >= frame_count())
        throw InputError("frame index out of range");
    if (offset < 0 || offset >= frame_words[frame] * 64)
        throw InputError("frame offset out of range");
    if (offset >= frame_bits[frame])
        return -1; // padding
    return frame_global_begin[frame] + offset;
}

} // namespace relic
