#include "relic/interconnect.hpp"

namespace relic {

std::array<Side, 2> sb_pair_sides(int p)
{
    switch (p) {
    case 0: return {SIDE_N, SIDE_S};
    case 1: return {SIDE_E, SIDE_W};
    case 2: return {SIDE_N, SIDE_E};
    case 3: return {SIDE_N, SIDE_W};
    case 4: return {SIDE_S, SIDE_E};
    default: return {SIDE_S, SIDE_W};
    }
}

int sb_pair_of(Side a, Side b)
{
    for (int p = 0; p < 6; ++p) {
        auto s = sb_pair_sides(p);
        if ((s[0] == a && s[1] == b) || (s[0] == b && s[1] == a))
            return p;
    }
    return -1;
}

std::vector<std::pair<CellCoord, Side>> SegmentSpace::touching_tiles(int seg) const
{
    std::vector<std::pair<CellCoord, Side>> out;
    if (seg < hseg_count) {
        int rest = seg / tracks;
        int k = rest % (cols + 1);
        int row = rest / (cols + 1);
        if (k < cols)
            out.push_back({{row, k}, SIDE_W});
        if (k > 0)
            out.push_back({{row, k - 1}, SIDE_E});
    } else {
        int rest = (seg - hseg_count) / tracks;
        int c = rest % cols;
        int k = rest / cols;
        if (k < rows)
            out.push_back({{k, c}, SIDE_N});
        if (k > 0)
            out.push_back({{k - 1, c}, SIDE_S});
    }
    return out;
}

} // namespace relic
