#include "relic/pnr.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>

namespace relic {

namespace {

struct RouterState {
    const FabricArch &arch;
    SegmentSpace ss;
    std::vector<int> occupancy;   // nets currently using each segment
    std::vector<double> history;  // accumulated congestion cost
    double present_factor = 0.5;

    explicit RouterState(const FabricArch &a) : arch(a), ss(a)
    {
        occupancy.assign(ss.count(), 0);
        history.assign(ss.count(), 0.0);
    }

    double use_cost(int seg, bool own) const
    {
        if (own)
            return 0.0;
        double c = 1.0 + history[seg];
        if (occupancy[seg] > 0)
            c += present_factor * occupancy[seg];
        return c;
    }
};

struct PathStep {
    int prev_seg = -1;
    CellCoord via_tile;
    int via_pair = -1;
};

// Multi-source Dijkstra from the net's current tree (or the driver's output
// segments) to one sink pin, staying on a single track by construction.
bool dijkstra_to_sink(RouterState &rs, const std::vector<int> &sources,
                      const std::set<int> &own, CellCoord sink_cell, int sink_pin, int forced_track,
                      std::vector<int> &out_path, std::vector<NetRoute::SbBit> &out_bits)
{
    const SegmentSpace &ss = rs.ss;
    std::vector<double> dist(ss.count(), -1.0);
    std::vector<PathStep> from(ss.count());
    using QEntry = std::pair<double, int>;
    std::priority_queue<QEntry, std::vector<QEntry>, std::greater<>> queue;

    for (int s : sources) {
        double c = rs.use_cost(s, own.count(s) > 0);
        if (dist[s] < 0 || c < dist[s]) {
            dist[s] = c;
            queue.push({c, s});
        }
    }

    const Side sink_side = input_pin_side(sink_pin);
    auto is_target = [&](int seg) {
        int t = ss.track_of(seg);
        if (forced_track >= 0 && t != forced_track)
            return false;
        return seg == ss.side_segment(sink_cell, sink_side, t);
    };

    while (!queue.empty()) {
        auto [d, seg] = queue.top();
        queue.pop();
        if (d > dist[seg])
            continue;
        if (is_target(seg)) {
            // backtrack
            out_path.clear();
            out_bits.clear();
            for (int s = seg; s >= 0;) {
                out_path.push_back(s);
                const PathStep &st = from[s];
                if (st.prev_seg >= 0)
                    out_bits.push_back({st.via_tile, ss.track_of(s), st.via_pair});
                s = st.prev_seg;
            }
            return true;
        }
        const int track = ss.track_of(seg);
        if (forced_track >= 0 && track != forced_track)
            continue;
        for (auto &[tile, side] : ss.touching_tiles(seg)) {
            for (int other_side = 0; other_side < 4; ++other_side) {
                if (other_side == side)
                    continue;
                int next = ss.side_segment(tile, Side(other_side), track);
                double nd = d + rs.use_cost(next, own.count(next) > 0);
                if (dist[next] < 0 || nd < dist[next]) {
                    dist[next] = nd;
                    from[next] = {seg, tile, sb_pair_of(side, Side(other_side))};
                    queue.push({nd, next});
                }
            }
        }
    }
    return false;
}

} // namespace

Routing route(const HardenedDesign &design, const Placement &placement, const FabricArch &arch,
              uint64_t seed)
{
    (void)seed; // the algorithm is deterministic; the seed is part of the API
    RouterState rs(arch);
    std::vector<NetRoute> nets = extract_nets(design);

    Routing result;
    constexpr int kMaxIterations = 50;
    for (int iter = 1; iter <= kMaxIterations; ++iter) {
        std::fill(rs.occupancy.begin(), rs.occupancy.end(), 0);
        bool failed = false;
        for (NetRoute &net : nets) {
            net.track = -1;
            net.segments.clear();
            net.sb_bits.clear();

            CellCoord driver_cell = placement.cell_of[net.driver];
            std::vector<int> driver_segs;
            for (int t = 0; t < arch.channel_width; ++t)
                driver_segs.push_back(rs.ss.side_segment(driver_cell, output_pin_side(), t));

            std::set<int> own;
            bool net_ok = true;
            for (auto &[sink_node, sink_pin] : net.sinks) {
                std::vector<int> sources =
                    own.empty() ? driver_segs : std::vector<int>(own.begin(), own.end());
                std::vector<int> path;
                std::vector<NetRoute::SbBit> bits;
                if (!dijkstra_to_sink(rs, sources, own, placement.cell_of[sink_node], sink_pin,
                                      net.track, path, bits)) {
                    net_ok = false;
                    break;
                }
                if (net.track < 0)
                    net.track = rs.ss.track_of(path.front());
                for (int seg : path) {
                    if (!own.count(seg)) {
                        own.insert(seg);
                        ++rs.occupancy[seg];
                    }
                }
                net.sb_bits.insert(net.sb_bits.end(), bits.begin(), bits.end());
            }
            if (!net_ok) {
                failed = true;
                break;
            }
            net.segments.assign(own.begin(), own.end());
        }

        if (!failed) {
            bool overused = false;
            for (int occ : rs.occupancy)
                if (occ > 1) {
                    overused = true;
                    break;
                }
            if (!overused) {
                result.nets = nets;
                result.iterations = iter;
                for (const NetRoute &n : nets)
                    result.wire_segments += int64_t(n.segments.size());
                check_routing(design, placement, result, arch);
                return result;
            }
            for (size_t s = 0; s < rs.occupancy.size(); ++s)
                if (rs.occupancy[s] > 1)
                    rs.history[s] += 1.0;
        }
        rs.present_factor *= 1.5;
    }
    throw UnroutableError("congestion persists after " + std::to_string(kMaxIterations) +
                          " iterations; channel width too small");
}

void check_routing(const HardenedDesign &design, const Placement &placement,
                   const Routing &routing, const FabricArch &arch)
{
    SegmentSpace ss(arch);
    std::vector<int> users(ss.count(), 0);
    for (const NetRoute &net : routing.nets) {
        RELIC_CHECK(!net.sinks.empty(), "routed net has sinks");
        RELIC_CHECK(net.track >= 0 && net.track < arch.channel_width, "net track in range");
        std::set<int> segs(net.segments.begin(), net.segments.end());
        RELIC_CHECK(segs.size() == net.segments.size(), "segment list has no duplicates");
        for (int seg : segs) {
            RELIC_CHECK(ss.track_of(seg) == net.track, "net stays on one track");
            ++users[seg];
        }
        // switch bits join listed segments only, forming a tree
        RELIC_CHECK(net.sb_bits.size() + 1 == segs.size(), "net tree has |segs|-1 joins");
        std::map<int, int> parent;
        for (int seg : segs)
            parent[seg] = seg;
        std::function<int(int)> root = [&](int s) {
            while (parent[s] != s)
                s = parent[s] = parent[parent[s]];
            return s;
        };
        for (const NetRoute::SbBit &bit : net.sb_bits) {
            auto sides = sb_pair_sides(bit.pair);
            int a = ss.side_segment(bit.tile, sides[0], bit.track);
            int b = ss.side_segment(bit.tile, sides[1], bit.track);
            RELIC_CHECK(segs.count(a) && segs.count(b), "switch bit joins net segments");
            int ra = root(a), rb = root(b);
            RELIC_CHECK(ra != rb, "configured routing stays acyclic");
            parent[ra] = rb;
        }
        int r0 = root(*segs.begin());
        for (int seg : segs)
            RELIC_CHECK(root(seg) == r0, "net is fully connected");
        // driver and every sink touch the tree
        int drv = ss.side_segment(placement.cell_of[net.driver], output_pin_side(), net.track);
        RELIC_CHECK(segs.count(drv), "driver output segment on the net");
        for (auto &[node, pin] : net.sinks) {
            int snk = ss.side_segment(placement.cell_of[node], input_pin_side(pin), net.track);
            RELIC_CHECK(segs.count(snk), "sink tap segment on the net");
        }
    }
    for (int u : users)
        RELIC_CHECK(u <= 1, "no track segment shared between nets");
    (void)design;
}

} // namespace relic
