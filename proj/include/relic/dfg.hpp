#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "relic/common.hpp"

namespace relic {

enum class Op { Mul, Add, Sub, SubAbs, Vote };

constexpr int op_arity(Op op) { return op == Op::Vote ? 3 : 2; }
const char *op_name(Op op);
bool op_from_name(std::string_view name, Op &out);

enum class Criticality { High, Medium, Low };
const char *criticality_name(Criticality c);
bool criticality_from_name(std::string_view name, Criticality &out);

// A node operand: a primary input port, an earlier node, or an immediate.
struct Operand {
    enum class Kind { Input, Node, Const };
    Kind kind = Kind::Const;
    int index = 0; // input or node index
    Word value = 0;

    static Operand input(int i) { return {Kind::Input, i, 0}; }
    static Operand node(int i) { return {Kind::Node, i, 0}; }
    static Operand constant(Word v) { return {Kind::Const, 0, v}; }
    bool operator==(const Operand &) const = default;
};

struct DfgNode {
    std::string id;
    Op op = Op::Add;
    std::vector<Operand> args;
    Criticality crit = Criticality::High;
    // Redundancy bookkeeping for triplicated graphs: replica 0/1/2 and the
    // index of the original node the replica (or its voter) derives from.
    int replica = -1;
    int origin = -1;
};

struct OutputPort {
    std::string id;
    int node = -1;
};

// Kernel IR. Nodes are stored in topological order: every Node operand
// references a strictly earlier index.
struct DataflowGraph {
    std::string name;
    int data_width = 16;
    std::vector<std::string> inputs;
    std::vector<DfgNode> nodes;
    std::vector<OutputPort> outputs;

    int input_index(std::string_view id) const;
    int node_index(std::string_view id) const;
    // Throws InputError if any structural invariant is broken.
    void validate() const;
    // Longest node depth with unit node latency (inputs are depth 0).
    int depth() const;
    std::vector<int> node_depths() const;
    uint64_t hash() const;
};

DataflowGraph parse_dfg(const std::string &text);
std::string to_dfg_text(const DataflowGraph &g);

// Built-in kernel generators.
DataflowGraph gen_conv(int n);
DataflowGraph gen_sad(int n);
DataflowGraph gen_sobel();

// Single-op semantics shared by the golden evaluator and the fabric simulator:
// two's-complement wrap-around at `width`, |a-b| with |MIN| = MIN, and a
// bitwise-majority vote.
Word apply_op(Op op, Word a, Word b, Word c, int width);

// Golden reference evaluator; ground truth for all fabric simulations.
std::vector<Word> eval_dfg(const DataflowGraph &g, std::span<const Word> inputs);

} // namespace relic
