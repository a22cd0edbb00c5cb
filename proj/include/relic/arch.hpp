#pragma once

#include <map>
#include <optional>
#include <string>

#include "relic/common.hpp"
#include "relic/dfg.hpp"

namespace relic {

enum class FuKind { Mul, Add, Sub, SubAbs, Vote };
constexpr int kFuKindCount = 5;

const char *fu_kind_name(FuKind k);
bool fu_kind_from_name(std::string_view name, FuKind &out);
FuKind fu_kind_for_op(Op op);

// Per-cell hardening variant. Plain cells hold one opcode copy, TMR cells
// three internal replicas plus an embedded majority voter, DWC cells two
// replicas plus a comparator, EDC cells one replica plus a residue checker.
enum class CellVariant { Plain, Tmr, Dwc, Edc };
const char *cell_variant_name(CellVariant v);
bool cell_variant_from_name(std::string_view name, CellVariant &out);

enum class FabricMode { Plain, TmrFu, DwcFu, EdcFu, Mixed };
const char *fabric_mode_name(FabricMode m);
bool fabric_mode_from_name(std::string_view name, FabricMode &out);

struct CellCoord {
    int row = 0;
    int col = 0;
    auto operator<=>(const CellCoord &) const = default;
};

inline int chebyshev(CellCoord a, CellCoord b)
{
    int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
    int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
    return dr > dc ? dr : dc;
}

struct FuCell {
    FuKind kind = FuKind::Add;
    CellVariant variant = CellVariant::Plain;
};

// Number of routed input pins of a cell: voters merge three values, every
// arithmetic FU takes two operands. One output pin each.
constexpr int cell_input_pins(FuKind k) { return k == FuKind::Vote ? 3 : 2; }

// Island-style overlay fabric: a rows x cols grid of tiles, each tile holding
// an optional FU with its connection box plus a switch box on W tracks.
struct FabricArch {
    std::string name = "fabric";
    int rows = 0;
    int cols = 0;
    int channel_width = 4;
    int data_width = 16;
    FabricMode mode = FabricMode::Plain;
    int separation = 2; // min Chebyshev distance between replicas of one triple
    std::map<CellCoord, FuCell> cells;

    void validate() const;
    const FuCell *cell_at(CellCoord c) const;
    int tile_count() const { return rows * cols; }
    uint64_t hash() const;
};

FabricArch parse_fabric(const std::string &text);
std::string to_fab_text(const FabricArch &a);

} // namespace relic
