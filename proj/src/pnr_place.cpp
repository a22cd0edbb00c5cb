#include "relic/pnr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace relic {

bool op_compatible_with_cell(Op op, FuKind kind) { return fu_kind_for_op(op) == kind; }

int Placement::node_at(const HardenedDesign &d, CellCoord c) const
{
    for (size_t i = 0; i < cell_of.size(); ++i) {
        (void)d;
        if (cell_of[i] == c)
            return int(i);
    }
    return -1;
}

std::vector<NetRoute> extract_nets(const HardenedDesign &design)
{
    const DataflowGraph &g = design.dfg;
    std::vector<NetRoute> nets(g.nodes.size());
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        nets[i].driver = int(i);
        for (int pin = 0; pin < int(g.nodes[i].args.size()); ++pin) {
            const Operand &a = g.nodes[i].args[pin];
            if (a.kind == Operand::Kind::Node)
                nets[a.index].sinks.push_back({int(i), pin});
        }
    }
    std::erase_if(nets, [](const NetRoute &n) { return n.sinks.empty(); });
    return nets;
}

namespace {

struct Triples {
    std::vector<int> origin;  // -1 for non-replicated nodes
    std::vector<int> replica; // -1 unless 0/1/2
    // origin -> node indices of its replicas
    std::map<int, std::vector<int>> members;

    explicit Triples(const DataflowGraph &g)
    {
        origin.resize(g.nodes.size());
        replica.resize(g.nodes.size());
        for (size_t i = 0; i < g.nodes.size(); ++i) {
            origin[i] = g.nodes[i].origin;
            replica[i] = g.nodes[i].replica;
            if (g.nodes[i].replica >= 0)
                members[g.nodes[i].origin].push_back(int(i));
        }
    }
    bool any() const { return !members.empty(); }
};

struct PlaceState {
    const HardenedDesign &design;
    const FabricArch &arch;
    Triples triples;
    std::vector<NetRoute> nets;
    std::vector<std::vector<int>> nets_of_node;
    std::vector<CellCoord> cell_of;
    std::map<CellCoord, int> node_of;
    // candidate cells per node, shared per (kind, variant)
    std::map<std::pair<FuKind, CellVariant>, std::vector<CellCoord>> candidates;

    PlaceState(const HardenedDesign &d, const FabricArch &a, const std::set<CellCoord> &excluded)
        : design(d), arch(a), triples(d.dfg), nets(extract_nets(d))
    {
        nets_of_node.resize(d.dfg.nodes.size());
        for (size_t n = 0; n < nets.size(); ++n) {
            nets_of_node[nets[n].driver].push_back(int(n));
            for (auto &[node, pin] : nets[n].sinks)
                if (nets_of_node[node].empty() || nets_of_node[node].back() != int(n))
                    nets_of_node[node].push_back(int(n));
        }
        for (const auto &[coord, cell] : a.cells)
            if (!excluded.count(coord))
                candidates[{cell.kind, cell.variant}].push_back(coord);
        cell_of.assign(d.dfg.nodes.size(), CellCoord{-1, -1});
    }

    std::pair<FuKind, CellVariant> need_of(int node) const
    {
        return {fu_kind_for_op(design.dfg.nodes[node].op), design.node_variant[node]};
    }

    bool separation_ok(int node, CellCoord at) const
    {
        if (triples.replica[node] < 0 || arch.separation <= 0)
            return true;
        auto it = triples.members.find(triples.origin[node]);
        for (int sib : it->second) {
            if (sib == node || cell_of[sib].row < 0)
                continue;
            if (chebyshev(at, cell_of[sib]) < arch.separation)
                return false;
        }
        return true;
    }

    int64_t net_hpwl(const NetRoute &net) const
    {
        int min_r = cell_of[net.driver].row, max_r = min_r;
        int min_c = cell_of[net.driver].col, max_c = min_c;
        for (auto &[node, pin] : net.sinks) {
            min_r = std::min(min_r, cell_of[node].row);
            max_r = std::max(max_r, cell_of[node].row);
            min_c = std::min(min_c, cell_of[node].col);
            max_c = std::max(max_c, cell_of[node].col);
        }
        return (max_r - min_r) + (max_c - min_c);
    }

    int64_t total_hpwl() const
    {
        int64_t sum = 0;
        for (const NetRoute &n : nets)
            sum += net_hpwl(n);
        return sum;
    }
};

// Bounded depth-first construction; row-major candidate order (shuffled on
// retries), backtracking when the separation floor pins a triple down.
bool initial_placement(PlaceState &st, Rng &rng, bool shuffled)
{
    const size_t n = st.design.dfg.nodes.size();
    st.cell_of.assign(n, CellCoord{-1, -1});
    st.node_of.clear();

    // replicas first (most constrained), grouped by triple; voters and plain
    // nodes afterwards
    std::vector<int> order_nodes;
    for (size_t i = 0; i < n; ++i)
        if (st.design.dfg.nodes[i].replica >= 0)
            order_nodes.push_back(int(i));
    for (size_t i = 0; i < n; ++i)
        if (st.design.dfg.nodes[i].replica < 0)
            order_nodes.push_back(int(i));

    std::map<std::pair<FuKind, CellVariant>, std::vector<CellCoord>> order = st.candidates;
    if (shuffled)
        for (auto &[key, cells] : order)
            std::shuffle(cells.begin(), cells.end(), rng);

    std::vector<int> cursor(n, 0);
    int64_t steps = 0;
    size_t at = 0;
    while (at < order_nodes.size()) {
        if (++steps > 200000)
            return false;
        const int node = order_nodes[at];
        const auto &cands = order[st.need_of(node)];
        bool placed = false;
        for (int &c = cursor[at]; c < int(cands.size()); ++c) {
            const CellCoord cell = cands[c];
            if (st.node_of.count(cell) || !st.separation_ok(node, cell))
                continue;
            st.cell_of[node] = cell;
            st.node_of[cell] = node;
            ++c;
            placed = true;
            break;
        }
        if (placed) {
            ++at;
            if (at < order_nodes.size())
                cursor[at] = 0;
            continue;
        }
        if (at == 0)
            return false; // exhausted the root choices
        cursor[at] = 0;
        --at;
        const int prev = order_nodes[at];
        st.node_of.erase(st.cell_of[prev]);
        st.cell_of[prev] = {-1, -1};
    }
    return true;
}

} // namespace

Placement place(const HardenedDesign &design, const FabricArch &arch, uint64_t seed,
                const std::set<CellCoord> &excluded)
{
    arch.validate();
    design.dfg.validate();
    if (design.dfg.data_width != arch.data_width)
        throw InputError("kernel data width " + std::to_string(design.dfg.data_width) +
                         " does not match fabric data width " + std::to_string(arch.data_width));

    PlaceState st(design, arch, excluded);

    ResourceCounts need = counts_of(design);
    ResourceCounts have;
    for (const auto &[key, cells] : st.candidates)
        have.counts[key] = int(cells.size());
    if (!need.fits_in(have))
        throw InfeasibleError("insufficient cells: design needs more FUs than the fabric offers");

    if (st.triples.any() && arch.separation > std::max(arch.rows - 1, arch.cols - 1))
        throw InfeasibleError("separation " + std::to_string(arch.separation) +
                              " exceeds the grid diameter");

    Rng rng(seed);
    bool ok = initial_placement(st, rng, false);
    for (int attempt = 0; !ok && attempt < 50; ++attempt)
        ok = initial_placement(st, rng, true);
    if (!ok)
        throw InfeasibleError("could not construct a placement satisfying replica separation");

    // Annealing: T0 from the variance of 20 random swaps, geometric cooling
    // 0.95, 100 * cells moves per temperature, stop below 1% acceptance.
    std::vector<int> movable(st.design.dfg.nodes.size());
    std::iota(movable.begin(), movable.end(), 0);
    int64_t cost = st.total_hpwl();
    int64_t moves_evaluated = 0;

    auto try_move = [&](double temperature, bool always_accept) -> bool {
        ++moves_evaluated;
        int node = movable[rng() % movable.size()];
        const auto &cands = st.candidates[st.need_of(node)];
        if (cands.size() < 2)
            return false;
        CellCoord from = st.cell_of[node];
        CellCoord to = cands[rng() % cands.size()];
        if (to == from)
            return false;
        int other = -1;
        if (auto it = st.node_of.find(to); it != st.node_of.end())
            other = it->second;
        if (other >= 0 && st.need_of(other) != st.need_of(node))
            return false; // occupant cannot live on `from`

        // tentative apply
        st.cell_of[node] = to;
        st.node_of[to] = node;
        st.node_of.erase(from);
        if (other >= 0) {
            st.cell_of[other] = from;
            st.node_of[from] = other;
        }
        bool sep = st.separation_ok(node, to) && (other < 0 || st.separation_ok(other, from));

        int64_t delta = 0;
        if (sep) {
            std::vector<int> affected = st.nets_of_node[node];
            if (other >= 0)
                affected.insert(affected.end(), st.nets_of_node[other].begin(),
                                st.nets_of_node[other].end());
            std::sort(affected.begin(), affected.end());
            affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
            // recompute after; recompute before by undo would double work, so
            // compute new first, then undo only if rejected
            std::vector<int64_t> after;
            after.reserve(affected.size());
            for (int n : affected)
                after.push_back(st.net_hpwl(st.nets[n]));
            // undo to measure before
            st.cell_of[node] = from;
            if (other >= 0)
                st.cell_of[other] = to;
            for (size_t k = 0; k < affected.size(); ++k)
                delta += after[k] - st.net_hpwl(st.nets[affected[k]]);
            st.cell_of[node] = to;
            if (other >= 0)
                st.cell_of[other] = from;
        }

        bool accept = sep;
        if (accept && !always_accept && delta > 0) {
            double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            accept = std::exp(-double(delta) / temperature) > u;
        }
        if (accept) {
            cost += delta;
            return true;
        }
        // revert
        st.cell_of[node] = from;
        st.node_of[from] = node;
        if (other >= 0) {
            st.cell_of[other] = to;
            st.node_of[to] = other;
        } else {
            st.node_of.erase(to);
        }
        return false;
    };

    if (!movable.empty()) {
        double t0 = 1.0;
        {
            std::vector<double> samples;
            for (int i = 0; i < 20; ++i) {
                try_move(1.0, true);
                samples.push_back(double(cost));
            }
            double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
            double var = 0;
            for (double s : samples)
                var += (s - mean) * (s - mean);
            var /= samples.size();
            t0 = std::max(1.0, 20.0 * std::sqrt(var));
        }

        const int64_t moves_per_temp = 100 * int64_t(arch.cells.size());
        double temperature = t0;
        while (temperature > 1e-6) {
            int64_t accepted = 0;
            for (int64_t m = 0; m < moves_per_temp; ++m)
                if (try_move(temperature, false))
                    ++accepted;
            temperature *= 0.95;
            if (double(accepted) < 0.01 * double(moves_per_temp))
                break;
        }
    }

    Placement result;
    result.cell_of = st.cell_of;
    result.excluded = excluded;
    result.hpwl = st.total_hpwl();
    result.moves_evaluated = moves_evaluated;
    for (const auto &[key, cells] : st.candidates)
        for (const CellCoord &c : cells)
            if (!st.node_of.count(c))
                result.spare.push_back(c);
    std::sort(result.spare.begin(), result.spare.end());
    check_placement(design, result, arch);
    return result;
}

void check_placement(const HardenedDesign &design, const Placement &placement,
                     const FabricArch &arch)
{
    const DataflowGraph &g = design.dfg;
    RELIC_CHECK(placement.cell_of.size() == g.nodes.size(), "placement covers every node");
    std::set<CellCoord> used;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        CellCoord c = placement.cell_of[i];
        RELIC_CHECK(c.row >= 0 && c.row < arch.rows && c.col >= 0 && c.col < arch.cols,
                    "placed cell inside the grid");
        RELIC_CHECK(!used.count(c), "placement is injective");
        used.insert(c);
        const FuCell *cell = arch.cell_at(c);
        RELIC_CHECK(cell, "node placed on an FU cell");
        RELIC_CHECK(op_compatible_with_cell(g.nodes[i].op, cell->kind),
                    "node op compatible with cell kind");
        RELIC_CHECK(cell->variant == design.node_variant[i],
                    "node hardening variant matches cell variant");
        RELIC_CHECK(!placement.excluded.count(c), "placement avoids excluded cells");
    }
    // replica separation, checkable independently of the placer
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.nodes[i].replica < 0)
            continue;
        for (size_t j = i + 1; j < g.nodes.size(); ++j) {
            if (g.nodes[j].replica < 0 || g.nodes[j].origin != g.nodes[i].origin ||
                g.nodes[j].replica == g.nodes[i].replica)
                continue;
            RELIC_CHECK(chebyshev(placement.cell_of[i], placement.cell_of[j]) >= arch.separation,
                        "replica separation respected");
        }
    }
}

} // namespace relic
