#include "doctest.h"

#include <map>
#include <set>

#include "relic/bitstream.hpp"
#include "relic/secded.hpp"

using namespace relic;

namespace {

FabricArch tiny_fabric()
{
    FabricArch a;
    a.name = "tiny";
    a.rows = 1;
    a.cols = 1;
    a.channel_width = 2;
    a.mode = FabricMode::Plain;
    a.cells[{0, 0}] = {FuKind::Mul, CellVariant::Plain};
    a.validate();
    return a;
}

FabricArch grid_fabric(int rows, int cols, int w, FabricMode mode)
{
    FabricArch a;
    a.name = "grid";
    a.rows = rows;
    a.cols = cols;
    a.channel_width = w;
    a.mode = mode;
    CellVariant v = mode == FabricMode::TmrFu   ? CellVariant::Tmr
                    : mode == FabricMode::DwcFu ? CellVariant::Dwc
                    : mode == FabricMode::EdcFu ? CellVariant::Edc
                                                : CellVariant::Plain;
    int i = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            FuKind kinds[] = {FuKind::Mul, FuKind::Add, FuKind::SubAbs};
            a.cells[{r, c}] = {kinds[i++ % 3], v};
        }
    a.validate();
    return a;
}

FabricConfig random_config(const FabricArch &arch, const BitstreamLayout &layout, uint64_t seed)
{
    Rng rng(seed);
    FabricConfig cfg = empty_config(arch);
    for (auto &[coord, cc] : cfg.cells) {
        const FuCell *cell = arch.cell_at(coord);
        cc.opcode[0] = uint8_t(rng() & 0xf);
        if (cell->variant == CellVariant::Tmr) {
            cc.opcode[1] = uint8_t(rng() & 0xf);
            cc.opcode[2] = uint8_t(rng() & 0xf);
        } else if (cell->variant == CellVariant::Dwc) {
            cc.opcode[1] = uint8_t(rng() & 0xf);
        } else if (cell->variant == CellVariant::Edc) {
            cc.checker_enable = uint8_t(rng() & 0x3);
        }
        for (auto &sel : cc.in_select)
            sel = uint8_t(rng() % uint64_t(1 << layout.cb_select_bits));
        cc.out_select = uint8_t(rng() % uint64_t(1 << layout.cb_select_bits));
    }
    for (auto &tile : cfg.sb)
        for (auto &track : tile)
            track = uint8_t(rng() & 0x3f);
    return cfg;
}

} // namespace

TEST_CASE("fab grammar round trip and validation")
{
    const char *text = R"(# small fabric
fabric demo
rows 2
cols 3
channel_width 4
data_width 16
hardening plain
separation 2
fu 0 0 mul
fu 0 1 add
fu 1 2 vote
)";
    FabricArch a = parse_fabric(text);
    CHECK(a.rows == 2);
    CHECK(a.cols == 3);
    CHECK(a.cells.size() == 3);
    CHECK(a.cell_at({1, 2})->kind == FuKind::Vote);
    FabricArch b = parse_fabric(to_fab_text(a));
    CHECK(to_fab_text(a) == to_fab_text(b));
    CHECK(a.hash() == b.hash());
}

TEST_CASE("fab parse errors")
{
    CHECK_THROWS_AS(parse_fabric("fabric f\nrows 1\ncols 1\nfu 0 0 mul\nfu 0 0 mul\n"),
                    InputError); // duplicate cell
    CHECK_THROWS_AS(parse_fabric("fabric f\nrows 1\ncols 1\nfu 0 5 mul\n"), InputError);
    CHECK_THROWS_AS(parse_fabric("fabric f\nrows 1\ncols 1\nchannel_width 0\nfu 0 0 mul\n"),
                    InputError);
    CHECK_THROWS_AS(parse_fabric("fabric f\nrows 1\ncols 1\nhardening tmr_fu\nfu 0 0 vote\n"),
                    InputError); // vote cells only in plain fabrics
}

TEST_CASE("layout bit budget of a 1x1 plain fabric at W=2")
{
    BitstreamLayout lay = bit_layout(tiny_fabric());
    // 4 opcode + 3 pins * ceil(log2 2) + 6 * 2 tracks = 19
    CHECK(lay.total_bits == 19);
    CHECK(lay.frame_count() == 1);
    CHECK(lay.frame_words[0] == 1);
}

TEST_CASE("layout per-mode FU budgets")
{
    auto fu_bits = [](FabricMode mode) {
        FabricArch a = grid_fabric(1, 1, 2, mode);
        BitstreamLayout lay = bit_layout(a);
        int n = 0;
        for (const Field &f : lay.fields)
            if (f.type == FieldType::Opcode || f.type == FieldType::CheckerEnable)
                n += f.width;
        return n;
    };
    CHECK(fu_bits(FabricMode::Plain) == 4);
    CHECK(fu_bits(FabricMode::TmrFu) == 12); // one copy per internal replica
    CHECK(fu_bits(FabricMode::DwcFu) == 8);
    CHECK(fu_bits(FabricMode::EdcFu) == 6); // 4 + 2 checker-enable bits
}

TEST_CASE("layout determinism and frame count")
{
    FabricArch a = grid_fabric(4, 4, 4, FabricMode::Plain);
    BitstreamLayout l1 = bit_layout(a);
    BitstreamLayout l2 = bit_layout(a);
    CHECK(l1.frame_count() == 4); // one frame per column
    CHECK(l1.total_bits == l2.total_bits);
    REQUIRE(l1.fields.size() == l2.fields.size());
    for (size_t i = 0; i < l1.fields.size(); ++i) {
        CHECK(l1.fields[i].global_start == l2.fields[i].global_start);
        CHECK(l1.fields[i].frame == l2.fields[i].frame);
        CHECK(l1.fields[i].frame_offset == l2.fields[i].frame_offset);
    }
}

TEST_CASE("layout is a bijection between global indices and frame offsets")
{
    for (FabricMode mode : {FabricMode::Plain, FabricMode::TmrFu, FabricMode::EdcFu}) {
        FabricArch a = grid_fabric(3, 2, 3, mode);
        BitstreamLayout lay = bit_layout(a);
        std::set<std::pair<int, int>> seen;
        for (int b = 0; b < lay.total_bits; ++b) {
            BitInfo info = lay.bit(b);
            CHECK(info.global_index == b);
            CHECK(!seen.count({info.frame, info.offset}));
            seen.insert({info.frame, info.offset});
            CHECK(lay.global_of(info.frame, info.offset) == b);
        }
        // padding maps to no config bit
        for (int fr = 0; fr < lay.frame_count(); ++fr)
            for (int off = lay.frame_bits[fr]; off < lay.frame_words[fr] * 64; ++off)
                CHECK(lay.global_of(fr, off) == -1);
    }
}

TEST_CASE("TMR replica bits partition into three disjoint domains per cell")
{
    FabricArch a = grid_fabric(2, 2, 2, FabricMode::TmrFu);
    BitstreamLayout lay = bit_layout(a);
    std::map<std::pair<int, int>, std::set<int>> replicas; // cell -> replica ids
    int replica_bits = 0;
    for (int b = 0; b < lay.total_bits; ++b) {
        BitInfo info = lay.bit(b);
        if (info.kind != BitKind::FuReplica)
            continue;
        ++replica_bits;
        CHECK(info.replica >= 0);
        CHECK(info.replica <= 2);
        replicas[{info.cell.row, info.cell.col}].insert(info.replica);
    }
    CHECK(replica_bits == 4 * 12);
    for (auto &[cell, ids] : replicas)
        CHECK(ids == std::set<int>{0, 1, 2});
}

TEST_CASE("secded corrects singles and flags doubles")
{
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        uint64_t word = rng();
        uint8_t check = secded_check_bits(word);
        CHECK(secded_syndrome(word, check).clean());
        for (int b = 0; b < 64; ++b) {
            Syndrome s = secded_syndrome(word ^ (uint64_t(1) << b), check);
            REQUIRE(s.kind == Syndrome::Kind::SingleData);
            REQUIRE(s.data_bit == b);
        }
        uint64_t dbl = word ^ 0b11;
        CHECK(secded_syndrome(dbl, check).uncorrectable());
        // check-bit flip
        Syndrome s = secded_syndrome(word, check ^ 0x4);
        CHECK(s.kind == Syndrome::Kind::SingleCheck);
    }
}

TEST_CASE("encode/decode round trip on random configs")
{
    for (FabricMode mode : {FabricMode::Plain, FabricMode::TmrFu, FabricMode::DwcFu,
                            FabricMode::EdcFu}) {
        FabricArch a = grid_fabric(3, 3, 4, mode);
        BitstreamLayout lay = bit_layout(a);
        for (uint64_t seed = 0; seed < 10; ++seed) {
            FabricConfig cfg = random_config(a, lay, seed);
            Bitstream bs = encode_config(lay, cfg);
            DecodeReport rep;
            FabricConfig back = decode_bitstream(lay, bs, &rep);
            REQUIRE(rep.clean());
            REQUIRE(back == cfg);
        }
    }
}

TEST_CASE("single payload flip reports a syndrome at the right location")
{
    FabricArch a = grid_fabric(2, 3, 2, FabricMode::Plain);
    BitstreamLayout lay = bit_layout(a);
    FabricConfig cfg = random_config(a, lay, 7);
    Bitstream bs = encode_config(lay, cfg);

    const int bit = 13;
    BitInfo info = lay.bit(bit);
    bs.flip_bit(lay, bit);
    DecodeReport rep;
    decode_bitstream(lay, bs, &rep);
    REQUIRE(rep.issues.size() == 1);
    CHECK(!rep.issues[0].uncorrectable);
    CHECK(rep.issues[0].frame == info.frame);
    CHECK(rep.issues[0].payload_bit == info.offset);

    // second flip in the same 64-bit word: uncorrectable
    int second = -1;
    for (int b = 0; b < lay.total_bits; ++b) {
        BitInfo other = lay.bit(b);
        if (b != bit && other.frame == info.frame && other.offset / 64 == info.offset / 64) {
            second = b;
            break;
        }
    }
    REQUIRE(second >= 0);
    bs.flip_bit(lay, second);
    DecodeReport rep2;
    decode_bitstream(lay, bs, &rep2);
    REQUIRE(rep2.issues.size() == 1);
    CHECK(rep2.issues[0].uncorrectable);
    CHECK(rep2.any_uncorrectable);
}

TEST_CASE("bitstream file round trip")
{
    FabricArch a = grid_fabric(2, 2, 2, FabricMode::Plain);
    BitstreamLayout lay = bit_layout(a);
    FabricConfig cfg = random_config(a, lay, 11);
    Bitstream bs = encode_config(lay, cfg);
    auto bytes = serialize_bitstream(bs);
    CHECK(bytes[0] == 'R');
    CHECK(bytes[1] == 'O');
    CHECK(bytes[2] == 'V');
    CHECK(bytes[3] == 'B');
    Bitstream back = deserialize_bitstream(bytes, lay);
    CHECK(back == bs);

    bytes[0] = 'X';
    CHECK_THROWS_AS(deserialize_bitstream(bytes, lay), InputError);
}

TEST_CASE("decode rejects foreign fabric hashes")
{
    FabricArch a = grid_fabric(2, 2, 2, FabricMode::Plain);
    FabricArch b = grid_fabric(2, 2, 4, FabricMode::Plain);
    BitstreamLayout la = bit_layout(a);
    BitstreamLayout lb = bit_layout(b);
    Bitstream bs = encode_config(la, empty_config(a));
    CHECK_THROWS_AS(decode_bitstream(lb, bs, nullptr), InputError);
}
