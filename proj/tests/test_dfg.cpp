#include "doctest.h"

#include "relic/dfg.hpp"
#include "relic/harden.hpp"

using namespace relic;

namespace {

const char *kConv2x2 = R"(# 2x2 convolution
kernel conv2x2
width 16
input i0 i1 i2 i3
input c0 c1 c2 c3
node m0 = mul i0 c0
node m1 = mul i1 c1
node m2 = mul i2 c2
node m3 = mul i3 c3
node a0 = add m0 m1
node a1 = add m2 m3
node a2 = add a0 a1
output o0 = a2
)";

int count_op(const DataflowGraph &g, Op op)
{
    int n = 0;
    for (const DfgNode &node : g.nodes)
        n += node.op == op;
    return n;
}

// Independent oracle: dot product with wrap-around, no DFG machinery.
Word dot_oracle(std::span<const Word> v, int n2, int width)
{
    uint64_t acc = 0;
    for (int i = 0; i < n2; ++i)
        acc += uint64_t(v[i] & width_mask(width)) * uint64_t(v[n2 + i] & width_mask(width));
    return Word(acc) & width_mask(width);
}

Word abs_wrap(Word x, int width)
{
    if (sign_bit(x, width))
        return (0u - x) & width_mask(width);
    return x & width_mask(width);
}

} // namespace

TEST_CASE("parse conv2x2 file")
{
    DataflowGraph g = parse_dfg(kConv2x2);
    CHECK(g.name == "conv2x2");
    CHECK(g.inputs.size() == 8);
    CHECK(g.nodes.size() == 7);
    CHECK(g.outputs.size() == 1);
    CHECK(count_op(g, Op::Mul) == 4);
    CHECK(count_op(g, Op::Add) == 3);
}

TEST_CASE("parse errors")
{
    CHECK_THROWS_AS(parse_dfg("kernel k\nnode a = add a 1\n"), InputError); // self-cycle
    CHECK_THROWS_AS(parse_dfg("kernel k\ninput i\nnode a = add i i i\n"), InputError); // arity
    CHECK_THROWS_AS(parse_dfg("kernel k\nnode a = add x y\n"), InputError); // undefined
    CHECK_THROWS_AS(parse_dfg("kernel k\ninput i i\n"), InputError);        // duplicate
    CHECK_THROWS_AS(parse_dfg("kernel k\nwidth 12\ninput i\nnode a = add i i\n"), InputError);
    CHECK_THROWS_AS(parse_dfg("input i\n"), InputError); // missing kernel line
    CHECK_THROWS_AS(parse_dfg("kernel k\ninput i\nnode a = add i i\ncriticality b low\n"),
                    InputError);
}

TEST_CASE("parse round-trips through the printer")
{
    DataflowGraph g = parse_dfg(kConv2x2);
    DataflowGraph g2 = parse_dfg(to_dfg_text(g));
    CHECK(to_dfg_text(g) == to_dfg_text(g2));
}

TEST_CASE("generator node counts")
{
    CHECK(gen_conv(2).nodes.size() == 7); // 4 mul + 3 add
    CHECK(count_op(gen_conv(2), Op::Mul) == 4);
    CHECK(count_op(gen_conv(2), Op::Add) == 3);

    DataflowGraph c1 = gen_conv(1);
    CHECK(count_op(c1, Op::Mul) == 1);
    CHECK(count_op(c1, Op::Add) == 0);

    DataflowGraph c3 = gen_conv(3);
    CHECK(count_op(c3, Op::Mul) == 9);
    CHECK(count_op(c3, Op::Add) == 8); // n^2 - 1 adder tree

    DataflowGraph s2 = gen_sad(2);
    CHECK(count_op(s2, Op::SubAbs) == 4);
    CHECK(count_op(s2, Op::Add) == 3);
    CHECK(gen_sad(1).nodes.size() == 1);

    CHECK(gen_sobel().nodes.size() == 37); // 2*(9+8) + 2 + 1
}

TEST_CASE("generators are deterministic")
{
    CHECK(to_dfg_text(gen_conv(3)) == to_dfg_text(gen_conv(3)));
    CHECK(to_dfg_text(gen_sobel()) == to_dfg_text(gen_sobel()));
}

TEST_CASE("eval golden values")
{
    DataflowGraph conv = gen_conv(2);
    std::vector<Word> in = {1, 2, 3, 4, /*coeffs*/ 1, 0, 0, 1};
    CHECK(eval_dfg(conv, in) == std::vector<Word>{5});

    DataflowGraph sad = gen_sad(2);
    std::vector<Word> sin = {1, 2, 3, 4, 4, 3, 2, 1};
    CHECK(eval_dfg(sad, sin) == std::vector<Word>{8});

    CHECK(apply_op(Op::Vote, 1, 2, 4, 16) == 0); // bitwise majority of 001,010,100
}

TEST_CASE("eval arity mismatch")
{
    CHECK_THROWS_AS(eval_dfg(gen_conv(2), std::vector<Word>{1, 2, 3}), InputError);
}

TEST_CASE("subabs wraps |MIN| to MIN")
{
    CHECK(apply_op(Op::SubAbs, 0x8000, 0, 0, 16) == 0x8000);
    CHECK(apply_op(Op::SubAbs, 3, 5, 0, 16) == 2);
    CHECK(apply_op(Op::SubAbs, 5, 3, 0, 16) == 2);
}

TEST_CASE("vote(a,a,b) == a exhaustively at width 8")
{
    for (int a = 0; a < 256; ++a)
        for (int b = 0; b < 256; ++b)
            REQUIRE(apply_op(Op::Vote, Word(a), Word(a), Word(b), 8) == Word(a));
}

TEST_CASE("conv matches the dot-product oracle on random vectors")
{
    for (int n : {1, 2, 3}) {
        DataflowGraph conv = gen_conv(n);
        Rng rng(17);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<Word> in(conv.inputs.size());
            for (Word &w : in)
                w = Word(rng()) & width_mask(16);
            CHECK(eval_dfg(conv, in)[0] == dot_oracle(in, n * n, 16));
        }
    }
}

TEST_CASE("sobel matches a direct gradient oracle")
{
    static const int kx[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
    static const int ky[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
    DataflowGraph sobel = gen_sobel();
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Word> p(9);
        for (Word &w : p)
            w = Word(rng()) & width_mask(16);
        uint32_t gx = 0, gy = 0;
        for (int i = 0; i < 9; ++i) {
            gx += Word(uint64_t(int64_t(kx[i]))) * p[i];
            gy += Word(uint64_t(int64_t(ky[i]))) * p[i];
        }
        Word want =
            (abs_wrap(gx & 0xffff, 16) + abs_wrap(gy & 0xffff, 16)) & width_mask(16);
        CHECK(eval_dfg(sobel, p)[0] == want);
    }
}

TEST_CASE("node depth")
{
    CHECK(gen_conv(2).depth() == 3);  // mul, add, add
    CHECK(gen_sad(2).depth() == 3);
    CHECK(gen_conv(1).depth() == 1);
}

TEST_CASE("criticality parsing")
{
    DataflowGraph g = parse_dfg("kernel k\ninput i\nnode a = add i i\ncriticality a low\n");
    CHECK(g.nodes[0].crit == Criticality::Low);
}

TEST_CASE("constant operands")
{
    DataflowGraph g = parse_dfg("kernel k\ninput i\nnode a = subabs i 0\noutput o = a\n");
    CHECK(eval_dfg(g, std::vector<Word>{0xFFFF}) == std::vector<Word>{1}); // |-1| = 1
    DataflowGraph g2 = parse_dfg("kernel k\ninput i\nnode a = mul i -1\noutput o = a\n");
    CHECK(eval_dfg(g2, std::vector<Word>{5}) == std::vector<Word>{0xFFFB});
}
