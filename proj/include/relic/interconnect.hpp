#pragma once

#include <array>
#include <vector>

#include "relic/arch.hpp"

namespace relic {

// Physical interconnect geometry shared by the router, the bitstream
// generator and the functional simulator.
//
// Tiles sit on a rows x cols grid; every tile owns a switch box. Track
// segments run between the switch boxes of adjacent tiles, with dangling
// stub segments on the grid boundary so every tile sees four sides:
//
//   hseg(r, k, t): west side of tile (r, k) == east side of tile (r, k-1),
//                  k in [0, cols]  (k == 0 and k == cols are boundary stubs)
//   vseg(k, c, t): north side of tile (k, c) == south side of tile (k-1, c),
//                  k in [0, rows]
//
// The switch box of tile (r, c) can pass-connect any two of its four side
// segments of the same track (disjoint topology, 6 pair bits per track).
// Pin hookup is fixed: input pin 0 taps the north side, pin 1 the west side,
// pin 2 (voters) the south side; the output pin drives the east side.

enum Side { SIDE_N = 0, SIDE_E = 1, SIDE_S = 2, SIDE_W = 3 };

struct SegmentSpace {
    int rows = 0;
    int cols = 0;
    int tracks = 0;
    int hseg_count = 0; // rows * (cols + 1) * tracks
    int vseg_count = 0; // (rows + 1) * cols * tracks

    explicit SegmentSpace(const FabricArch &a)
        : SegmentSpace(a.rows, a.cols, a.channel_width)
    {
    }
    SegmentSpace(int r, int c, int w)
        : rows(r), cols(c), tracks(w), hseg_count(r * (c + 1) * w), vseg_count((r + 1) * c * w)
    {
    }

    int count() const { return hseg_count + vseg_count; }
    int hseg(int row, int k, int track) const { return (row * (cols + 1) + k) * tracks + track; }
    int vseg(int k, int col, int track) const
    {
        return hseg_count + (k * cols + col) * tracks + track;
    }
    int track_of(int seg) const
    {
        return (seg < hseg_count ? seg : seg - hseg_count) % tracks;
    }

    int side_segment(CellCoord tile, Side side, int track) const
    {
        switch (side) {
        case SIDE_N: return vseg(tile.row, tile.col, track);
        case SIDE_E: return hseg(tile.row, tile.col + 1, track);
        case SIDE_S: return vseg(tile.row + 1, tile.col, track);
        case SIDE_W: return hseg(tile.row, tile.col, track);
        }
        return -1;
    }

    // Tiles whose switch box touches this segment (1 on the boundary, else 2),
    // each paired with the side the segment occupies at that tile.
    std::vector<std::pair<CellCoord, Side>> touching_tiles(int seg) const;
};

// Side pair joined by switch-box pair bit `p` (SbPair order NS,EW,NE,NW,SE,SW).
std::array<Side, 2> sb_pair_sides(int p);
// Pair bit connecting two sides, -1 if a == b.
int sb_pair_of(Side a, Side b);

constexpr Side input_pin_side(int pin)
{
    return pin == 0 ? SIDE_N : (pin == 1 ? SIDE_W : SIDE_S);
}
constexpr Side output_pin_side() { return SIDE_E; }

} // namespace relic
