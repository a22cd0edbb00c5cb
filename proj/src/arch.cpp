#include "relic/arch.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

namespace relic {

const char *fu_kind_name(FuKind k)
{
    switch (k) {
    case FuKind::Mul: return "mul";
    case FuKind::Add: return "add";
    case FuKind::Sub: return "sub";
    case FuKind::SubAbs: return "subabs";
    case FuKind::Vote: return "vote";
    }
    return "?";
}

bool fu_kind_from_name(std::string_view name, FuKind &out)
{
    for (FuKind k : {FuKind::Mul, FuKind::Add, FuKind::Sub, FuKind::SubAbs, FuKind::Vote}) {
        if (name == fu_kind_name(k)) {
            out = k;
            return true;
        }
    }
    return false;
}

FuKind fu_kind_for_op(Op op)
{
    switch (op) {
    case Op::Mul: return FuKind::Mul;
    case Op::Add: return FuKind::Add;
    case Op::Sub: return FuKind::Sub;
    case Op::SubAbs: return FuKind::SubAbs;
    case Op::Vote: return FuKind::Vote;
    }
    return FuKind::Add;
}

const char *cell_variant_name(CellVariant v)
{
    switch (v) {
    case CellVariant::Plain: return "plain";
    case CellVariant::Tmr: return "tmr";
    case CellVariant::Dwc: return "dwc";
    case CellVariant::Edc: return "edc";
    }
    return "?";
}

bool cell_variant_from_name(std::string_view name, CellVariant &out)
{
    for (CellVariant v : {CellVariant::Plain, CellVariant::Tmr, CellVariant::Dwc, CellVariant::Edc}) {
        if (name == cell_variant_name(v)) {
            out = v;
            return true;
        }
    }
    return false;
}

const char *fabric_mode_name(FabricMode m)
{
    switch (m) {
    case FabricMode::Plain: return "plain";
    case FabricMode::TmrFu: return "tmr_fu";
    case FabricMode::DwcFu: return "dwc_fu";
    case FabricMode::EdcFu: return "edc_fu";
    case FabricMode::Mixed: return "mixed";
    }
    return "?";
}

bool fabric_mode_from_name(std::string_view name, FabricMode &out)
{
    for (FabricMode m : {FabricMode::Plain, FabricMode::TmrFu, FabricMode::DwcFu, FabricMode::EdcFu,
                         FabricMode::Mixed}) {
        if (name == fabric_mode_name(m)) {
            out = m;
            return true;
        }
    }
    return false;
}

namespace {

CellVariant mode_variant(FabricMode m)
{
    switch (m) {
    case FabricMode::TmrFu: return CellVariant::Tmr;
    case FabricMode::DwcFu: return CellVariant::Dwc;
    case FabricMode::EdcFu: return CellVariant::Edc;
    default: return CellVariant::Plain;
    }
}

} // namespace

void FabricArch::validate() const
{
    if (rows < 1 || cols < 1)
        throw InputError("fabric '" + name + "': grid dimensions must be positive");
    if (channel_width < 1)
        throw InputError("fabric '" + name + "': channel_width must be >= 1");
    if (data_width != 8 && data_width != 16 && data_width != 32)
        throw InputError("fabric '" + name + "': data width must be 8, 16 or 32");
    if (separation < 0)
        throw InputError("fabric '" + name + "': separation must be >= 0");
    for (const auto &[coord, cell] : cells) {
        if (coord.row < 0 || coord.row >= rows || coord.col < 0 || coord.col >= cols)
            throw InputError("fabric '" + name + "': cell (" + std::to_string(coord.row) + "," +
                             std::to_string(coord.col) + ") outside the grid");
        if (cell.kind == FuKind::Vote) {
            if (mode != FabricMode::Plain || cell.variant != CellVariant::Plain)
                throw InputError("fabric '" + name +
                                 "': vote cells exist only in plain fabrics");
        }
        if (mode != FabricMode::Mixed && cell.kind != FuKind::Vote &&
            cell.variant != mode_variant(mode))
            throw InputError("fabric '" + name + "': cell variant inconsistent with fabric mode");
    }
}

const FuCell *FabricArch::cell_at(CellCoord c) const
{
    auto it = cells.find(c);
    return it == cells.end() ? nullptr : &it->second;
}

uint64_t FabricArch::hash() const { return fnv1a64(to_fab_text(*this)); }

namespace {

std::vector<std::string> split_ws(const std::string &line)
{
    std::vector<std::string> toks;
    std::istringstream is(line);
    std::string t;
    while (is >> t)
        toks.push_back(t);
    return toks;
}

bool parse_int(const std::string &tok, long long &out)
{
    if (tok.empty())
        return false;
    char *end = nullptr;
    out = std::strtoll(tok.c_str(), &end, 10);
    return end && *end == '\0';
}

[[noreturn]] void fail(int line_no, const std::string &msg)
{
    throw InputError("line " + std::to_string(line_no) + ": " + msg);
}

} // namespace

FabricArch parse_fabric(const std::string &text)
{
    FabricArch a;
    a.name.clear();
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    bool mode_set = false;
    struct PendingCell {
        int line_no;
        CellCoord coord;
        FuKind kind;
        bool has_variant;
        CellVariant variant;
    };
    std::vector<PendingCell> pending;

    while (std::getline(is, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::vector<std::string> t = split_ws(line);
        if (t.empty())
            continue;
        const std::string &kw = t[0];
        long long v;
        if (kw == "fabric") {
            if (t.size() != 2)
                fail(line_no, "expected: fabric <name>");
            a.name = t[1];
        } else if (kw == "rows" || kw == "cols" || kw == "channel_width" || kw == "data_width" ||
                   kw == "separation") {
            if (t.size() != 2 || !parse_int(t[1], v))
                fail(line_no, "expected: " + kw + " <n>");
            if (kw == "rows")
                a.rows = int(v);
            else if (kw == "cols")
                a.cols = int(v);
            else if (kw == "channel_width")
                a.channel_width = int(v);
            else if (kw == "data_width")
                a.data_width = int(v);
            else
                a.separation = int(v);
        } else if (kw == "hardening") {
            if (t.size() != 2 || !fabric_mode_from_name(t[1], a.mode))
                fail(line_no, "expected: hardening plain|tmr_fu|dwc_fu|edc_fu|mixed");
            mode_set = true;
        } else if (kw == "fu") {
            // fu <row> <col> <kind> [<variant>]   (variant only in mixed fabrics)
            if (t.size() != 4 && t.size() != 5)
                fail(line_no, "expected: fu <row> <col> <kind> [<variant>]");
            long long r, c;
            if (!parse_int(t[1], r) || !parse_int(t[2], c))
                fail(line_no, "bad cell coordinate");
            PendingCell pc;
            pc.line_no = line_no;
            pc.coord = {int(r), int(c)};
            if (!fu_kind_from_name(t[3], pc.kind))
                fail(line_no, "unknown FU kind '" + t[3] + "'");
            pc.has_variant = t.size() == 5;
            if (pc.has_variant && !cell_variant_from_name(t[4], pc.variant))
                fail(line_no, "unknown cell variant '" + t[4] + "'");
            pending.push_back(pc);
        } else {
            fail(line_no, "unknown directive '" + kw + "'");
        }
    }
    if (a.name.empty())
        throw InputError("missing 'fabric <name>' line");
    (void)mode_set;
    for (const PendingCell &pc : pending) {
        if (a.cells.count(pc.coord))
            fail(pc.line_no, "duplicate cell (" + std::to_string(pc.coord.row) + "," +
                                 std::to_string(pc.coord.col) + ")");
        FuCell cell;
        cell.kind = pc.kind;
        if (a.mode == FabricMode::Mixed)
            cell.variant = pc.has_variant ? pc.variant : CellVariant::Plain;
        else if (pc.has_variant)
            fail(pc.line_no, "cell variant is only valid in mixed fabrics");
        else
            cell.variant = pc.kind == FuKind::Vote ? CellVariant::Plain : mode_variant(a.mode);
        a.cells[pc.coord] = cell;
    }
    a.validate();
    return a;
}

std::string to_fab_text(const FabricArch &a)
{
    std::ostringstream os;
    os << "fabric " << a.name << "\n";
    os << "rows " << a.rows << "\n";
    os << "cols " << a.cols << "\n";
    os << "channel_width " << a.channel_width << "\n";
    os << "data_width " << a.data_width << "\n";
    os << "hardening " << fabric_mode_name(a.mode) << "\n";
    os << "separation " << a.separation << "\n";
    for (const auto &[coord, cell] : a.cells) {
        os << "fu " << coord.row << " " << coord.col << " " << fu_kind_name(cell.kind);
        if (a.mode == FabricMode::Mixed)
            os << " " << cell_variant_name(cell.variant);
        os << "\n";
    }
    return os.str();
}

} // namespace relic
