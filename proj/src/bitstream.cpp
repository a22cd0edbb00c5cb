#include "relic/bitstream.hpp"

#include <cstring>
#include <fstream>

#include "relic/secded.hpp"

namespace relic {

uint8_t opcode_for_op(Op op)
{
    switch (op) {
    case Op::Mul: return OPC_MUL;
    case Op::Add: return OPC_ADD;
    case Op::Sub: return OPC_SUB;
    case Op::SubAbs: return OPC_SUBABS;
    case Op::Vote: return OPC_VOTE;
    }
    return OPC_NOP;
}

bool effective_op(FuKind kind, uint8_t raw_opcode, Op &out)
{
    switch (raw_opcode) {
    case OPC_MUL:
        if (kind != FuKind::Mul)
            return false;
        out = Op::Mul;
        return true;
    case OPC_ADD:
        if (kind != FuKind::Add)
            return false;
        out = Op::Add;
        return true;
    case OPC_SUB:
        // subabs cells implement subtract with the abs stage bypassed
        if (kind != FuKind::Sub && kind != FuKind::SubAbs)
            return false;
        out = Op::Sub;
        return true;
    case OPC_SUBABS:
        if (kind != FuKind::SubAbs)
            return false;
        out = Op::SubAbs;
        return true;
    case OPC_VOTE:
        if (kind != FuKind::Vote)
            return false;
        out = Op::Vote;
        return true;
    default:
        return false; // nop-zero
    }
}

FabricConfig empty_config(const FabricArch &arch)
{
    FabricConfig cfg;
    for (const auto &[coord, cell] : arch.cells) {
        CellConfig cc;
        cc.in_select.assign(cell_input_pins(cell.kind), 0);
        cfg.cells[coord] = cc;
    }
    cfg.sb.assign(size_t(arch.rows) * size_t(arch.cols),
                  std::vector<uint8_t>(size_t(arch.channel_width), 0));
    return cfg;
}

bool Bitstream::get_payload_bit(int frame, int offset) const
{
    return (frames[frame].words[offset / 64] >> (offset % 64)) & 1;
}

void Bitstream::set_payload_bit(int frame, int offset, bool v)
{
    uint64_t &w = frames[frame].words[offset / 64];
    if (v)
        w |= uint64_t(1) << (offset % 64);
    else
        w &= ~(uint64_t(1) << (offset % 64));
}

bool Bitstream::get_bit(const BitstreamLayout &layout, int global_index) const
{
    BitInfo b = layout.bit(global_index);
    return get_payload_bit(b.frame, b.offset);
}

void Bitstream::flip_bit(const BitstreamLayout &layout, int global_index)
{
    BitInfo b = layout.bit(global_index);
    frames[b.frame].words[b.offset / 64] ^= uint64_t(1) << (b.offset % 64);
}

void Bitstream::recompute_check_bits()
{
    for (Frame &f : frames) {
        f.check.resize(f.words.size());
        for (size_t w = 0; w < f.words.size(); ++w)
            f.check[w] = secded_check_bits(f.words[w]);
    }
}

namespace {

uint64_t field_value(const FabricConfig &cfg, const Field &f, const FabricArch &arch)
{
    switch (f.type) {
    case FieldType::Opcode: {
        const CellConfig &cc = cfg.cells.at(f.cell);
        return cc.opcode[f.replica < 0 ? 0 : f.replica];
    }
    case FieldType::CheckerEnable:
        return cfg.cells.at(f.cell).checker_enable;
    case FieldType::CbIn:
        return cfg.cells.at(f.cell).in_select[f.pin];
    case FieldType::CbOut:
        return cfg.cells.at(f.cell).out_select;
    case FieldType::Sb:
        return cfg.sb[size_t(f.cell.row) * size_t(arch.cols) + size_t(f.cell.col)][f.track];
    }
    return 0;
}

} // namespace

Bitstream encode_config(const BitstreamLayout &layout, const FabricConfig &config)
{
    FabricArch probe; // only rows/cols used for sb addressing below
    probe.cols = layout.cols;

    Bitstream bs;
    bs.fabric_hash = layout.fabric_hash;
    bs.frames.resize(layout.frame_count());
    for (int fr = 0; fr < layout.frame_count(); ++fr)
        bs.frames[fr].words.assign(layout.frame_words[fr], 0);

    for (const Field &f : layout.fields) {
        uint64_t v = field_value(config, f, probe);
        if (v >= (uint64_t(1) << f.width))
            throw InputError("config value does not fit its field");
        for (int i = 0; i < f.width; ++i)
            bs.set_payload_bit(f.frame, f.frame_offset + i, (v >> i) & 1);
    }
    bs.recompute_check_bits();
    return bs;
}

FabricConfig decode_bitstream(const BitstreamLayout &layout, const Bitstream &bits,
                              DecodeReport *report)
{
    if (bits.fabric_hash != layout.fabric_hash)
        throw InputError("bitstream fabric hash does not match the fabric");
    if (int(bits.frames.size()) != layout.frame_count())
        throw InputError("bitstream frame count does not match the fabric");
    for (int fr = 0; fr < layout.frame_count(); ++fr)
        if (int(bits.frames[fr].words.size()) != layout.frame_words[fr] ||
            bits.frames[fr].check.size() != bits.frames[fr].words.size())
            throw InputError("bitstream frame " + std::to_string(fr) + " length mismatch");

    if (report) {
        report->issues.clear();
        report->any_uncorrectable = false;
        for (int fr = 0; fr < layout.frame_count(); ++fr) {
            const Frame &f = bits.frames[fr];
            for (size_t w = 0; w < f.words.size(); ++w) {
                Syndrome s = secded_syndrome(f.words[w], f.check[w]);
                if (s.clean())
                    continue;
                DecodeIssue issue;
                issue.frame = fr;
                issue.word = int(w);
                issue.uncorrectable = s.uncorrectable();
                if (s.kind == Syndrome::Kind::SingleData)
                    issue.payload_bit = int(w) * 64 + s.data_bit;
                report->issues.push_back(issue);
                report->any_uncorrectable |= issue.uncorrectable;
            }
        }
    }

    FabricConfig cfg;
    cfg.sb.assign(size_t(layout.rows) * size_t(layout.cols),
                  std::vector<uint8_t>(size_t(layout.channel_width), 0));
    for (const Field &f : layout.fields) {
        uint64_t v = 0;
        for (int i = 0; i < f.width; ++i)
            v |= uint64_t(bits.get_payload_bit(f.frame, f.frame_offset + i)) << i;
        switch (f.type) {
        case FieldType::Opcode: {
            CellConfig &cc = cfg.cells[f.cell];
            cc.opcode[f.replica < 0 ? 0 : f.replica] = uint8_t(v);
            break;
        }
        case FieldType::CheckerEnable:
            cfg.cells[f.cell].checker_enable = uint8_t(v);
            break;
        case FieldType::CbIn: {
            CellConfig &cc = cfg.cells[f.cell];
            if (int(cc.in_select.size()) <= f.pin)
                cc.in_select.resize(f.pin + 1, 0);
            cc.in_select[f.pin] = uint8_t(v);
            break;
        }
        case FieldType::CbOut:
            cfg.cells[f.cell].out_select = uint8_t(v);
            break;
        case FieldType::Sb:
            cfg.sb[size_t(f.cell.row) * size_t(layout.cols) + size_t(f.cell.col)][f.track] =
                uint8_t(v);
            break;
        }
    }
    return cfg;
}

namespace {

void put_u64(std::vector<uint8_t> &out, uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        out.push_back(uint8_t(v >> (8 * i)));
}

uint64_t take_u64(const std::vector<uint8_t> &in, size_t &at)
{
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= uint64_t(in.at(at++)) << (8 * i);
    return v;
}

} // namespace

// File format: magic "ROVB", 1-byte version, 8-byte fabric hash, then frames
// in column order. Each frame is its payload words (little-endian bytes)
// followed by one check byte per word; sizes come from the layout.
std::vector<uint8_t> serialize_bitstream(const Bitstream &bs)
{
    std::vector<uint8_t> out;
    out.insert(out.end(), std::begin(Bitstream::kMagic), std::end(Bitstream::kMagic));
    out.push_back(bs.version);
    put_u64(out, bs.fabric_hash);
    for (const Frame &f : bs.frames) {
        for (uint64_t w : f.words)
            put_u64(out, w);
        out.insert(out.end(), f.check.begin(), f.check.end());
    }
    return out;
}

Bitstream deserialize_bitstream(const std::vector<uint8_t> &bytes, const BitstreamLayout &layout)
{
    if (bytes.size() < 13 || std::memcmp(bytes.data(), Bitstream::kMagic, 4) != 0)
        throw InputError("not a bitstream file (bad magic)");
    size_t at = 4;
    Bitstream bs;
    bs.version = bytes.at(at++);
    if (bs.version != Bitstream::kVersion)
        throw InputError("unsupported bitstream version " + std::to_string(bs.version));
    bs.fabric_hash = take_u64(bytes, at);
    if (bs.fabric_hash != layout.fabric_hash)
        throw InputError("bitstream fabric hash does not match the fabric");
    bs.frames.resize(layout.frame_count());
    for (int fr = 0; fr < layout.frame_count(); ++fr) {
        Frame &f = bs.frames[fr];
        const int words = layout.frame_words[fr];
        if (bytes.size() - at < size_t(words) * 9)
            throw InputError("bitstream truncated in frame " + std::to_string(fr));
        f.words.resize(words);
        for (uint64_t &w : f.words)
            w = take_u64(bytes, at);
        f.check.resize(words);
        for (uint8_t &c : f.check)
            c = bytes.at(at++);
    }
    if (at != bytes.size())
        throw InputError("trailing bytes after bitstream payload");
    return bs;
}

void write_bitstream_file(const std::string &path, const Bitstream &bs)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw InputError("cannot open '" + path + "' for writing");
    auto bytes = serialize_bitstream(bs);
    os.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
}

Bitstream read_bitstream_file(const std::string &path, const BitstreamLayout &layout)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw InputError("cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                               std::istreambuf_iterator<char>());
    return deserialize_bitstream(bytes, layout);
}

} // namespace relic
