#pragma once

#include <vector>

#include "relic/arch.hpp"

namespace relic {

enum class BitKind { FuOp, FuReplica, CbSelect, SbSwitch };
const char *bit_kind_name(BitKind k, int replica = -1);

enum class FieldType { Opcode, CheckerEnable, CbIn, CbOut, Sb };

// One contiguous multi-bit configuration field. Fields are enumerated in the
// canonical order: column-major by frame, row order within a column, within a
// cell FU -> connection box -> switch box, little-endian within a field.
struct Field {
    FieldType type = FieldType::Sb;
    CellCoord cell;
    int replica = -1; // opcode copy index for TMR/DWC cells
    int pin = -1;     // CbIn pin index
    int track = -1;   // Sb track index
    int width = 0;
    int global_start = 0; // first global bit index
    int frame = 0;        // one frame per fabric column
    int frame_offset = 0; // first payload bit within the frame

    BitKind bit_kind() const;
};

struct BitInfo {
    int global_index = 0;
    int frame = 0;
    int offset = 0;
    BitKind kind = BitKind::SbSwitch;
    int replica = -1;
    CellCoord cell;
    int field = 0; // index into BitstreamLayout::fields
};

struct BitstreamLayout {
    int rows = 0;
    int cols = 0;
    int channel_width = 0;
    int cb_select_bits = 0; // ceil(log2(W)) per pin
    uint64_t fabric_hash = 0;
    std::vector<Field> fields;          // canonical order
    std::vector<int> frame_field_begin; // fields index of each frame, plus end sentinel
    std::vector<int> frame_bits;        // unpadded payload bits per frame
    std::vector<int> frame_words;       // padded 64-bit words per frame
    std::vector<int> frame_global_begin;
    int total_bits = 0;

    int frame_count() const { return cols; }
    BitInfo bit(int global_index) const;
    int field_of(int global_index) const;
    // Inverse of bit(): payload (frame, offset) -> global index, or -1 for padding.
    int global_of(int frame, int offset) const;
};

BitstreamLayout bit_layout(const FabricArch &arch);

} // namespace relic
