#include "doctest.h"

#include "relic/harden.hpp"
#include "relic/sim.hpp"

using namespace relic;

namespace {

int count_op(const DataflowGraph &g, Op op)
{
    int n = 0;
    for (const DfgNode &node : g.nodes)
        n += node.op == op;
    return n;
}

} // namespace

TEST_CASE("naive TMR of conv2x2: 12 mul, 9 add, 7 voters")
{
    DataflowGraph t = tmr_naive(gen_conv(2));
    CHECK(count_op(t, Op::Mul) == 12);
    CHECK(count_op(t, Op::Add) == 9);
    CHECK(count_op(t, Op::Vote) == 7);
    CHECK(t.nodes.size() == 28); // 3N + N voters
}

TEST_CASE("naive TMR of sad2x2: 12 subabs, 9 add, 7 voters")
{
    DataflowGraph t = tmr_naive(gen_sad(2));
    CHECK(count_op(t, Op::SubAbs) == 12);
    CHECK(count_op(t, Op::Add) == 9);
    CHECK(count_op(t, Op::Vote) == 7);
}

TEST_CASE("naive TMR of a single-node graph: 3 replicas + 1 voter")
{
    DataflowGraph t = tmr_naive(gen_conv(1));
    CHECK(t.nodes.size() == 4);
    CHECK(count_op(t, Op::Vote) == 1);
    CHECK(t.outputs.size() == 1);
}

TEST_CASE("naive TMR rejects graphs that already vote")
{
    DataflowGraph t = tmr_naive(gen_conv(1));
    CHECK_THROWS_AS(tmr_naive(t), InputError);
}

TEST_CASE("replica tags partition replicas into three equal sets")
{
    DataflowGraph t = tmr_naive(gen_sad(2));
    int per[3] = {0, 0, 0};
    int voters = 0;
    for (const DfgNode &n : t.nodes) {
        if (n.replica >= 0)
            ++per[n.replica];
        else {
            CHECK(n.op == Op::Vote);
            ++voters;
        }
    }
    CHECK(per[0] == 7);
    CHECK(per[1] == 7);
    CHECK(per[2] == 7);
    CHECK(voters == 7);
}

TEST_CASE("hardening preserves semantics on random vectors")
{
    for (const DataflowGraph &g : {gen_conv(2), gen_sad(2), gen_sobel()}) {
        DataflowGraph t = tmr_naive(g);
        auto vectors = random_vectors(100, int(g.inputs.size()), g.data_width, 5);
        for (const auto &v : vectors)
            REQUIRE(eval_dfg(t, v) == eval_dfg(g, v));
    }
}

TEST_CASE("assign_hardening tags nodes without touching the graph")
{
    DataflowGraph conv = gen_conv(2);
    HardenedDesign d = assign_hardening(conv, DesignMode::TmrFu);
    CHECK(d.dfg.nodes.size() == 7);
    CHECK(count_op(d.dfg, Op::Vote) == 0); // voters live inside the FUs
    for (CellVariant v : d.node_variant)
        CHECK(v == CellVariant::Tmr);
}

TEST_CASE("mixed mode resolves criticality, defaults to TMR cells")
{
    DataflowGraph conv = gen_conv(2);
    HardenedDesign pure = assign_hardening(conv, DesignMode::TmrFu);
    HardenedDesign mixed = assign_hardening(conv, DesignMode::Mixed);
    CHECK(pure.node_variant == mixed.node_variant); // all nodes default to high

    for (DfgNode &n : conv.nodes)
        n.crit = Criticality::Low;
    HardenedDesign low = assign_hardening(conv, DesignMode::Mixed);
    for (CellVariant v : low.node_variant)
        CHECK(v == CellVariant::Edc);

    std::map<std::string, Criticality> overrides{{"m0", Criticality::Medium}};
    HardenedDesign ov = assign_hardening(conv, DesignMode::Mixed, overrides);
    CHECK(ov.node_variant[0] == CellVariant::Dwc);

    CHECK_THROWS_AS(assign_hardening(conv, DesignMode::Mixed, {{"nosuch", Criticality::Low}}),
                    InputError);
}

TEST_CASE("size over {conv2x2, sad2x2}: the two published count sets")
{
    std::vector<DataflowGraph> kernels{gen_conv(2), gen_sad(2)};

    ResourceCounts naive = size_requirements(kernels, DesignMode::NaiveTmr);
    CHECK(naive.of(FuKind::Mul) == 12);
    CHECK(naive.of(FuKind::SubAbs) == 12);
    CHECK(naive.of(FuKind::Add) == 9);
    CHECK(naive.of(FuKind::Vote) == 7);

    ResourceCounts tmr = size_requirements(kernels, DesignMode::TmrFu);
    CHECK(tmr.of(FuKind::Mul) == 4);
    CHECK(tmr.of(FuKind::SubAbs) == 4);
    CHECK(tmr.of(FuKind::Add) == 3);
    CHECK(tmr.of(FuKind::Vote) == 0);
    CHECK(tmr.of(FuKind::Mul, CellVariant::Tmr) == 4);

    ResourceCounts none = size_requirements(std::vector<DataflowGraph>{gen_conv(2)},
                                            DesignMode::None);
    CHECK(none.of(FuKind::Mul) == 4);
    CHECK(none.of(FuKind::Add) == 3);
    CHECK(none.total() == 7);
}

TEST_CASE("size_requirements is monotone in the kernel set")
{
    std::vector<DataflowGraph> pool{gen_conv(2), gen_sad(2), gen_conv(3), gen_sobel()};
    for (DesignMode mode : {DesignMode::None, DesignMode::NaiveTmr, DesignMode::TmrFu}) {
        ResourceCounts prev;
        std::vector<DataflowGraph> set;
        for (const DataflowGraph &k : pool) {
            set.push_back(k);
            ResourceCounts now = size_requirements(set, mode);
            for (const auto &[key, count] : prev.counts)
                REQUIRE(now.of(key.first, key.second) >= count);
            prev = now;
        }
    }
}

TEST_CASE("minimal fabric is square-ish and fits the counts")
{
    std::vector<DataflowGraph> kernels{gen_conv(2), gen_sad(2)};
    ResourceCounts naive = size_requirements(kernels, DesignMode::NaiveTmr);
    FabricArch a = minimal_fabric(naive, 4, 16, 2, "naive_min");
    CHECK(a.rows == 7);
    CHECK(a.cols == 6);
    CHECK(naive.fits_in(cell_inventory(a)));
    CHECK(a.mode == FabricMode::Plain);

    ResourceCounts tmr = size_requirements(kernels, DesignMode::TmrFu);
    FabricArch b = minimal_fabric(tmr, 4, 16, 2, "tmr_min");
    CHECK(b.rows * b.cols == 12); // 11 cells, 4x3 grid
    CHECK(b.mode == FabricMode::TmrFu);
    CHECK(tmr.fits_in(cell_inventory(b)));
}
