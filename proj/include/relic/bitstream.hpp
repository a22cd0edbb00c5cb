#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "relic/layout.hpp"

namespace relic {

// Decoded overlay configuration: per-cell FU fields and per-tile switch state.
struct CellConfig {
    std::array<uint8_t, 3> opcode{0, 0, 0}; // copies; plain/EDC use [0], DWC [0..1]
    uint8_t checker_enable = 0;             // 2 bits, EDC cells only
    std::vector<uint8_t> in_select;         // track index per input pin
    uint8_t out_select = 0;

    bool operator==(const CellConfig &) const = default;
};

// 6 pass connections per track: NS, EW, NE, NW, SE, SW.
enum SbPair { SB_NS = 0, SB_EW = 1, SB_NE = 2, SB_NW = 3, SB_SE = 4, SB_SW = 5 };

struct FabricConfig {
    std::map<CellCoord, CellConfig> cells;
    // sb[row * cols + col][track] = 6-bit pair mask
    std::vector<std::vector<uint8_t>> sb;

    bool operator==(const FabricConfig &) const = default;
};

FabricConfig empty_config(const FabricArch &arch);

// FU opcode encoding. Out-of-range or kind-unsupported values behave as Nop
// (the cell outputs zero); flips must decode to something total.
enum Opcode : uint8_t {
    OPC_NOP = 0,
    OPC_MUL = 1,
    OPC_ADD = 2,
    OPC_SUB = 3,
    OPC_SUBABS = 4,
    OPC_VOTE = 5,
};
uint8_t opcode_for_op(Op op);
// Effective function of a cell given a raw 4-bit opcode value; false = nop.
bool effective_op(FuKind kind, uint8_t raw_opcode, Op &out);

struct Frame {
    std::vector<uint64_t> words;
    std::vector<uint8_t> check; // one SECDED check byte per word

    bool operator==(const Frame &) const = default;
};

struct Bitstream {
    static constexpr char kMagic[4] = {'R', 'O', 'V', 'B'};
    static constexpr uint8_t kVersion = 1;

    uint8_t version = kVersion;
    uint64_t fabric_hash = 0;
    std::vector<Frame> frames;

    bool get_payload_bit(int frame, int offset) const;
    void set_payload_bit(int frame, int offset, bool v);
    bool get_bit(const BitstreamLayout &layout, int global_index) const;
    // Flips payload only; check bits go stale, which is what scrubbing catches.
    void flip_bit(const BitstreamLayout &layout, int global_index);
    void recompute_check_bits();

    bool operator==(const Bitstream &) const = default;
};

struct DecodeIssue {
    int frame = 0;
    int word = 0;
    bool uncorrectable = false;
    int payload_bit = -1; // frame-relative offset of a correctable single flip
};

struct DecodeReport {
    std::vector<DecodeIssue> issues;
    bool any_uncorrectable = false;
    bool clean() const { return issues.empty(); }
};

Bitstream encode_config(const BitstreamLayout &layout, const FabricConfig &config);
// Reports syndromes; never silently repairs the payload.
FabricConfig decode_bitstream(const BitstreamLayout &layout, const Bitstream &bits,
                              DecodeReport *report = nullptr);

std::vector<uint8_t> serialize_bitstream(const Bitstream &bs);
Bitstream deserialize_bitstream(const std::vector<uint8_t> &bytes, const BitstreamLayout &layout);
void write_bitstream_file(const std::string &path, const Bitstream &bs);
Bitstream read_bitstream_file(const std::string &path, const BitstreamLayout &layout);

} // namespace relic
