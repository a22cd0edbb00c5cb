#include "relic/dfg.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

namespace relic {

const char *op_name(Op op)
{
    switch (op) {
    case Op::Mul: return "mul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::SubAbs: return "subabs";
    case Op::Vote: return "vote";
    }
    return "?";
}

bool op_from_name(std::string_view name, Op &out)
{
    for (Op op : {Op::Mul, Op::Add, Op::Sub, Op::SubAbs, Op::Vote}) {
        if (name == op_name(op)) {
            out = op;
            return true;
        }
    }
    return false;
}

const char *criticality_name(Criticality c)
{
    switch (c) {
    case Criticality::High: return "high";
    case Criticality::Medium: return "medium";
    case Criticality::Low: return "low";
    }
    return "?";
}

bool criticality_from_name(std::string_view name, Criticality &out)
{
    for (Criticality c : {Criticality::High, Criticality::Medium, Criticality::Low}) {
        if (name == criticality_name(c)) {
            out = c;
            return true;
        }
    }
    return false;
}

int DataflowGraph::input_index(std::string_view id) const
{
    for (size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i] == id)
            return int(i);
    return -1;
}

int DataflowGraph::node_index(std::string_view id) const
{
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id)
            return int(i);
    return -1;
}

void DataflowGraph::validate() const
{
    if (data_width != 8 && data_width != 16 && data_width != 32)
        throw InputError("kernel '" + name + "': data width must be 8, 16 or 32");
    for (size_t i = 0; i < nodes.size(); ++i) {
        const DfgNode &n = nodes[i];
        if (int(n.args.size()) != op_arity(n.op))
            throw InputError("node '" + n.id + "': " + op_name(n.op) + " takes " +
                             std::to_string(op_arity(n.op)) + " operands, got " +
                             std::to_string(n.args.size()));
        for (const Operand &a : n.args) {
            switch (a.kind) {
            case Operand::Kind::Input:
                if (a.index < 0 || a.index >= int(inputs.size()))
                    throw InputError("node '" + n.id + "': input operand out of range");
                break;
            case Operand::Kind::Node:
                if (a.index < 0 || a.index >= int(i))
                    throw InputError("node '" + n.id + "': cyclic or forward reference");
                break;
            case Operand::Kind::Const:
                break;
            }
        }
    }
    for (const OutputPort &o : outputs)
        if (o.node < 0 || o.node >= int(nodes.size()))
            throw InputError("output '" + o.id + "': unknown source node");
}

std::vector<int> DataflowGraph::node_depths() const
{
    std::vector<int> depth(nodes.size(), 0);
    for (size_t i = 0; i < nodes.size(); ++i) {
        int d = 0;
        for (const Operand &a : nodes[i].args)
            if (a.kind == Operand::Kind::Node)
                d = std::max(d, depth[a.index]);
        depth[i] = d + 1;
    }
    return depth;
}

int DataflowGraph::depth() const
{
    int best = 0;
    for (int d : node_depths())
        best = std::max(best, d);
    return best;
}

uint64_t DataflowGraph::hash() const { return fnv1a64(to_dfg_text(*this)); }

Word apply_op(Op op, Word a, Word b, Word c, int width)
{
    const Word mask = width_mask(width);
    a &= mask;
    b &= mask;
    c &= mask;
    switch (op) {
    case Op::Mul:
        return Word((uint64_t(a) * uint64_t(b)) & mask);
    case Op::Add:
        return (a + b) & mask;
    case Op::Sub:
        return (a - b) & mask;
    case Op::SubAbs: {
        Word d = (a - b) & mask;
        if (sign_bit(d, width))
            d = (0u - d) & mask; // |MIN| wraps to MIN
        return d;
    }
    case Op::Vote:
        return (a & b) | (a & c) | (b & c);
    }
    return 0;
}

std::vector<Word> eval_dfg(const DataflowGraph &g, std::span<const Word> inputs)
{
    if (inputs.size() != g.inputs.size())
        throw InputError("kernel '" + g.name + "' takes " + std::to_string(g.inputs.size()) +
                         " inputs, got " + std::to_string(inputs.size()));
    const Word mask = width_mask(g.data_width);
    std::vector<Word> value(g.nodes.size(), 0);
    auto arg = [&](const DfgNode &n, int i) -> Word {
        if (i >= int(n.args.size()))
            return 0;
        const Operand &a = n.args[i];
        switch (a.kind) {
        case Operand::Kind::Input: return inputs[a.index] & mask;
        case Operand::Kind::Node: return value[a.index];
        case Operand::Kind::Const: return a.value & mask;
        }
        return 0;
    };
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        const DfgNode &n = g.nodes[i];
        value[i] = apply_op(n.op, arg(n, 0), arg(n, 1), arg(n, 2), g.data_width);
    }
    std::vector<Word> out;
    out.reserve(g.outputs.size());
    for (const OutputPort &o : g.outputs)
        out.push_back(value[o.node]);
    return out;
}

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

bool valid_ident(const std::string &s)
{
    if (s.empty() || (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_'))
        return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '.';
    });
}

[[noreturn]] void fail(int line_no, const std::string &msg)
{
    throw InputError("line " + std::to_string(line_no) + ": " + msg);
}

} // namespace

DataflowGraph parse_dfg(const std::string &text)
{
    DataflowGraph g;
    std::map<std::string, int> node_ids;   // id -> index
    std::map<std::string, int> input_ids;  // id -> index
    std::vector<std::pair<std::string, std::string>> crit_lines;
    std::map<std::string, int> out_ids;

    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    bool have_kernel = false;
    std::vector<int> crit_line_nos;

    while (std::getline(is, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::vector<std::string> t = split_ws(line);
        if (t.empty())
            continue;
        const std::string &kw = t[0];
        if (kw == "kernel") {
            if (t.size() != 2 || !valid_ident(t[1]))
                fail(line_no, "expected: kernel <name>");
            g.name = t[1];
            have_kernel = true;
        } else if (kw == "width") {
            long long w;
            if (t.size() != 2 || !parse_int(t[1], w))
                fail(line_no, "expected: width <n>");
            g.data_width = int(w);
        } else if (kw == "input") {
            if (t.size() < 2)
                fail(line_no, "expected: input <id>...");
            for (size_t i = 1; i < t.size(); ++i) {
                if (!valid_ident(t[i]))
                    fail(line_no, "bad input identifier '" + t[i] + "'");
                if (input_ids.count(t[i]) || node_ids.count(t[i]))
                    fail(line_no, "duplicate identifier '" + t[i] + "'");
                input_ids[t[i]] = int(g.inputs.size());
                g.inputs.push_back(t[i]);
            }
        } else if (kw == "node") {
            // node <id> = <op> <arg> <arg> [<arg>]
            if (t.size() < 5 || t[2] != "=")
                fail(line_no, "expected: node <id> = <op> <arg> <arg> [<arg>]");
            const std::string &id = t[1];
            if (!valid_ident(id))
                fail(line_no, "bad node identifier '" + id + "'");
            if (node_ids.count(id) || input_ids.count(id))
                fail(line_no, "duplicate identifier '" + id + "'");
            DfgNode n;
            n.id = id;
            if (!op_from_name(t[3], n.op))
                fail(line_no, "unknown operation '" + t[3] + "'");
            if (int(t.size()) - 4 != op_arity(n.op))
                fail(line_no, std::string(op_name(n.op)) + " takes " +
                                  std::to_string(op_arity(n.op)) + " operands");
            for (size_t i = 4; i < t.size(); ++i) {
                const std::string &a = t[i];
                long long v;
                if (auto it = input_ids.find(a); it != input_ids.end())
                    n.args.push_back(Operand::input(it->second));
                else if (auto nt = node_ids.find(a); nt != node_ids.end())
                    n.args.push_back(Operand::node(nt->second));
                else if (parse_int(a, v))
                    n.args.push_back(Operand::constant(Word(uint64_t(v))));
                else if (a == id)
                    fail(line_no, "node '" + id + "' references itself (cycle)");
                else
                    fail(line_no, "undefined operand '" + a + "'");
            }
            node_ids[id] = int(g.nodes.size());
            g.nodes.push_back(std::move(n));
        } else if (kw == "output") {
            // output <id> = <node>
            if (t.size() != 4 || t[2] != "=")
                fail(line_no, "expected: output <id> = <node>");
            if (out_ids.count(t[1]))
                fail(line_no, "duplicate output '" + t[1] + "'");
            auto it = node_ids.find(t[3]);
            if (it == node_ids.end())
                fail(line_no, "undefined node '" + t[3] + "'");
            out_ids[t[1]] = int(g.outputs.size());
            g.outputs.push_back({t[1], it->second});
        } else if (kw == "criticality") {
            if (t.size() != 3)
                fail(line_no, "expected: criticality <node> <level>");
            crit_lines.emplace_back(t[1], t[2]);
            crit_line_nos.push_back(line_no);
        } else {
            fail(line_no, "unknown directive '" + kw + "'");
        }
    }
    if (!have_kernel)
        throw InputError("missing 'kernel <name>' line");
    for (size_t i = 0; i < crit_lines.size(); ++i) {
        auto it = node_ids.find(crit_lines[i].first);
        if (it == node_ids.end())
            fail(crit_line_nos[i], "criticality for undefined node '" + crit_lines[i].first + "'");
        Criticality c;
        if (!criticality_from_name(crit_lines[i].second, c))
            fail(crit_line_nos[i], "unknown criticality '" + crit_lines[i].second + "'");
        g.nodes[it->second].crit = c;
    }
    g.validate();
    return g;
}

std::string to_dfg_text(const DataflowGraph &g)
{
    std::ostringstream os;
    os << "kernel " << g.name << "\n";
    os << "width " << g.data_width << "\n";
    if (!g.inputs.empty()) {
        os << "input";
        for (const std::string &i : g.inputs)
            os << " " << i;
        os << "\n";
    }
    for (const DfgNode &n : g.nodes) {
        os << "node " << n.id << " = " << op_name(n.op);
        for (const Operand &a : n.args) {
            os << " ";
            switch (a.kind) {
            case Operand::Kind::Input: os << g.inputs[a.index]; break;
            case Operand::Kind::Node: os << g.nodes[a.index].id; break;
            case Operand::Kind::Const: os << a.value; break;
            }
        }
        os << "\n";
    }
    for (const OutputPort &o : g.outputs)
        os << "output " << o.id << " = " << g.nodes[o.node].id << "\n";
    for (const DfgNode &n : g.nodes)
        if (n.crit != Criticality::High)
            os << "criticality " << n.id << " " << criticality_name(n.crit) << "\n";
    return os.str();
}

namespace {

// Balanced reduction: pair up left to right, carry the odd element upward.
std::vector<Operand> add_tree(DataflowGraph &g, std::vector<Operand> level,
                              const std::string &prefix)
{
    int next = 0;
    while (level.size() > 1) {
        std::vector<Operand> up;
        for (size_t i = 0; i + 1 < level.size(); i += 2) {
            DfgNode n;
            n.id = prefix + std::to_string(next++);
            n.op = Op::Add;
            n.args = {level[i], level[i + 1]};
            g.nodes.push_back(n);
            up.push_back(Operand::node(int(g.nodes.size()) - 1));
        }
        if (level.size() % 2)
            up.push_back(level.back());
        level = std::move(up);
    }
    return level;
}

} // namespace

DataflowGraph gen_conv(int n)
{
    if (n < 1)
        throw InputError("gen_conv: window side must be >= 1");
    DataflowGraph g;
    g.name = "conv" + std::to_string(n) + "x" + std::to_string(n);
    const int k = n * n;
    for (int i = 0; i < k; ++i)
        g.inputs.push_back("i" + std::to_string(i));
    for (int i = 0; i < k; ++i)
        g.inputs.push_back("c" + std::to_string(i));
    std::vector<Operand> prods;
    for (int i = 0; i < k; ++i) {
        DfgNode m;
        m.id = "m" + std::to_string(i);
        m.op = Op::Mul;
        m.args = {Operand::input(i), Operand::input(k + i)};
        g.nodes.push_back(m);
        prods.push_back(Operand::node(int(g.nodes.size()) - 1));
    }
    auto sum = add_tree(g, prods, "a");
    g.outputs.push_back({"o0", sum[0].index});
    g.validate();
    return g;
}

DataflowGraph gen_sad(int n)
{
    if (n < 1)
        throw InputError("gen_sad: window side must be >= 1");
    DataflowGraph g;
    g.name = "sad" + std::to_string(n) + "x" + std::to_string(n);
    const int k = n * n;
    for (int i = 0; i < k; ++i)
        g.inputs.push_back("a" + std::to_string(i));
    for (int i = 0; i < k; ++i)
        g.inputs.push_back("b" + std::to_string(i));
    std::vector<Operand> diffs;
    for (int i = 0; i < k; ++i) {
        DfgNode d;
        d.id = "d" + std::to_string(i);
        d.op = Op::SubAbs;
        d.args = {Operand::input(i), Operand::input(k + i)};
        g.nodes.push_back(d);
        diffs.push_back(Operand::node(int(g.nodes.size()) - 1));
    }
    auto sum = add_tree(g, diffs, "s");
    g.outputs.push_back({"o0", sum[0].index});
    g.validate();
    return g;
}

DataflowGraph gen_sobel()
{
    DataflowGraph g;
    g.name = "sobel";
    for (int i = 0; i < 9; ++i)
        g.inputs.push_back("p" + std::to_string(i));

    // 3x3 gradient kernels, coefficients embedded as constants.
    static const int kx[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
    static const int ky[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};

    auto conv = [&](const int coeff[9], const std::string &prefix) -> Operand {
        std::vector<Operand> prods;
        for (int i = 0; i < 9; ++i) {
            DfgNode m;
            m.id = prefix + "m" + std::to_string(i);
            m.op = Op::Mul;
            m.args = {Operand::input(i), Operand::constant(Word(uint64_t(int64_t(coeff[i]))))};
            g.nodes.push_back(m);
            prods.push_back(Operand::node(int(g.nodes.size()) - 1));
        }
        return add_tree(g, prods, prefix + "a")[0];
    };

    Operand gx = conv(kx, "x");
    Operand gy = conv(ky, "y");

    DfgNode ax;
    ax.id = "absx";
    ax.op = Op::SubAbs;
    ax.args = {gx, Operand::constant(0)};
    g.nodes.push_back(ax);
    Operand absx = Operand::node(int(g.nodes.size()) - 1);

    DfgNode ay;
    ay.id = "absy";
    ay.op = Op::SubAbs;
    ay.args = {gy, Operand::constant(0)};
    g.nodes.push_back(ay);
    Operand absy = Operand::node(int(g.nodes.size()) - 1);

    DfgNode mag;
    mag.id = "mag";
    mag.op = Op::Add;
    mag.args = {absx, absy};
    g.nodes.push_back(mag);

    g.outputs.push_back({"o0", int(g.nodes.size()) - 1});
    g.validate();
    return g;
}

} // namespace relic
