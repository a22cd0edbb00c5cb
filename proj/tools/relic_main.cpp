// relic: a reliability-aware overlay toolchain.
//
// Subcommands: size, compile, sim, inject, scrub, repair. All randomness is
// seeded (--seed, or RELIC_SEED); identical inputs and seed give byte
// identical output files.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "relic/repair.hpp"
#include "relic/scrub.hpp"
#include "relic/seu.hpp"

using json = nlohmann::ordered_json;
using namespace relic;

namespace {

constexpr const char *kToolVersion = "0.1.0";

std::string slurp(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw InputError("cannot open '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void spit(const std::string &path, const std::string &data)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw InputError("cannot open '" + path + "' for writing");
    os << data;
}

struct Manifest {
    uint64_t seed = 0;
    json inputs = json::object();
    json parameters = json::object();
    std::vector<std::string> outputs;

    void add_input(const std::string &name, const std::string &content)
    {
        inputs[name] = hex64(fnv1a64(content));
    }
    json to_json() const
    {
        json m;
        m["tool"] = "relic";
        m["version"] = kToolVersion;
        m["seed"] = seed;
        m["inputs"] = inputs;
        m["parameters"] = parameters;
        m["outputs"] = outputs;
        return m;
    }
};

// Kernel argument: a .dfg file path or a built-in generator name
// (conv<N>x<N>, sad<N>x<N>, sobel).
bool builtin_kernel(const std::string &name, int data_width, DataflowGraph &out)
{
    auto square_spec = [&](const std::string &prefix, int &n) {
        if (name.rfind(prefix, 0) != 0)
            return false;
        const std::string rest = name.substr(prefix.size());
        auto x = rest.find('x');
        if (x == std::string::npos)
            return false;
        try {
            int a = std::stoi(rest.substr(0, x));
            int b = std::stoi(rest.substr(x + 1));
            if (a != b || a < 1)
                return false;
            n = a;
            return true;
        } catch (const std::exception &) {
            return false;
        }
    };
    int n = 0;
    if (square_spec("conv", n))
        out = gen_conv(n);
    else if (square_spec("sad", n))
        out = gen_sad(n);
    else if (name == "sobel")
        out = gen_sobel();
    else
        return false;
    out.data_width = data_width;
    return true;
}

DataflowGraph load_kernel(const std::string &arg, int data_width, Manifest &manifest)
{
    std::ifstream probe(arg);
    if (probe.good()) {
        std::string text = slurp(arg);
        manifest.add_input(arg, text);
        return parse_dfg(text);
    }
    DataflowGraph g;
    if (builtin_kernel(arg, data_width, g)) {
        manifest.add_input("builtin:" + arg, to_dfg_text(g));
        return g;
    }
    throw InputError("kernel '" + arg + "' is neither a readable file nor a built-in name");
}

struct DesignArgs {
    std::vector<std::string> kernels;
    std::string fabric = "auto";
    std::string mode = "none";
    int data_width = 16;
    int channel_width = 4;
    int separation = 2;

    void attach(CLI::App *cmd, bool kernels_required = true)
    {
        auto *k = cmd->add_option("-k,--kernel", kernels,
                                  "kernel .dfg file or built-in (conv2x2, sad2x2, sobel)");
        if (kernels_required)
            k->required();
        cmd->add_option("--fabric", fabric, "fabric .fab file, or 'auto' for a minimal fabric");
        cmd->add_option("--mode", mode, "none|naive|tmrfu|dwcfu|edcfu|mixed");
        cmd->add_option("--data-width", data_width, "data width for built-in kernels");
        cmd->add_option("--channel-width", channel_width, "channel width for auto fabrics");
        cmd->add_option("--separation", separation, "replica separation for auto fabrics");
    }
};

struct LoadedDesign {
    std::vector<DataflowGraph> kernels;
    DesignMode mode = DesignMode::None;
    FabricArch arch;
};

LoadedDesign load_design(const DesignArgs &args, Manifest &manifest)
{
    LoadedDesign d;
    if (!design_mode_from_name(args.mode, d.mode))
        throw InputError("unknown mode '" + args.mode + "'");
    for (const std::string &k : args.kernels)
        d.kernels.push_back(load_kernel(k, args.data_width, manifest));
    if (args.fabric == "auto") {
        ResourceCounts rc = size_requirements(d.kernels, d.mode);
        d.arch = minimal_fabric(rc, args.channel_width, d.kernels.front().data_width,
                                args.separation, "auto");
        manifest.add_input("fabric:auto", to_fab_text(d.arch));
    } else {
        std::string text = slurp(args.fabric);
        manifest.add_input(args.fabric, text);
        d.arch = parse_fabric(text);
    }
    manifest.parameters["mode"] = design_mode_name(d.mode);
    manifest.parameters["fabric"] = d.arch.name;
    return d;
}

uint64_t base_seed()
{
    if (const char *env = std::getenv("RELIC_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 0;
}

std::vector<std::vector<Word>> load_vectors(const std::string &path, int inputs, int width)
{
    std::string text = slurp(path);
    std::vector<std::vector<Word>> out;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r,") == std::string::npos)
            continue;
        std::vector<Word> row;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) {
            try {
                row.push_back(Word(uint64_t(std::stoll(tok))) & width_mask(width));
            } catch (const std::exception &) {
                if (line_no == 1 && out.empty()) {
                    row.clear();
                    break; // header line
                }
                throw InputError("vectors line " + std::to_string(line_no) + ": bad value '" +
                                 tok + "'");
            }
        }
        if (row.empty())
            continue;
        if (int(row.size()) != inputs)
            throw InputError("vectors line " + std::to_string(line_no) + ": expected " +
                             std::to_string(inputs) + " values, got " +
                             std::to_string(row.size()));
        out.push_back(std::move(row));
    }
    return out;
}

std::set<CellCoord> parse_faulty(const std::vector<std::string> &args)
{
    std::set<CellCoord> out;
    for (const std::string &a : args) {
        // fu:<row>,<col>
        if (a.rfind("fu:", 0) != 0)
            throw InputError("--faulty expects fu:<row>,<col>, got '" + a + "'");
        auto comma = a.find(',', 3);
        if (comma == std::string::npos)
            throw InputError("--faulty expects fu:<row>,<col>, got '" + a + "'");
        try {
            out.insert({std::stoi(a.substr(3, comma - 3)), std::stoi(a.substr(comma + 1))});
        } catch (const std::exception &) {
            throw InputError("--faulty expects fu:<row>,<col>, got '" + a + "'");
        }
    }
    return out;
}

json counts_json(const ResourceCounts &rc)
{
    json out = json::object();
    for (FuKind k : {FuKind::Mul, FuKind::Add, FuKind::Sub, FuKind::SubAbs, FuKind::Vote}) {
        if (rc.of(k) == 0 && k != FuKind::Vote)
            continue;
        out[fu_kind_name(k)] = rc.of(k);
    }
    return out;
}

struct BitBreakdown {
    int total = 0;
    int fu = 0;
    int cb = 0;
    int sb = 0;
};

BitBreakdown layout_breakdown(const BitstreamLayout &layout)
{
    BitBreakdown b;
    b.total = layout.total_bits;
    for (const Field &f : layout.fields) {
        switch (f.bit_kind()) {
        case BitKind::FuOp:
        case BitKind::FuReplica: b.fu += f.width; break;
        case BitKind::CbSelect: b.cb += f.width; break;
        case BitKind::SbSwitch: b.sb += f.width; break;
        }
    }
    return b;
}

json placement_json(const CompiledDesign &cd)
{
    json nodes = json::array();
    for (size_t i = 0; i < cd.design.dfg.nodes.size(); ++i) {
        json n;
        n["id"] = cd.design.dfg.nodes[i].id;
        n["op"] = op_name(cd.design.dfg.nodes[i].op);
        n["row"] = cd.placement.cell_of[i].row;
        n["col"] = cd.placement.cell_of[i].col;
        if (cd.design.dfg.nodes[i].replica >= 0)
            n["replica"] = cd.design.dfg.nodes[i].replica;
        nodes.push_back(n);
    }
    return nodes;
}

json compile_report(const CompiledDesign &cd)
{
    json r;
    r["kernel"] = cd.kernel.name;
    r["fabric"] = cd.arch.name;
    r["mode"] = design_mode_name(cd.design.mode);
    r["grid"] = {{"rows", cd.arch.rows}, {"cols", cd.arch.cols}};
    r["data_width"] = cd.arch.data_width;
    r["channel_width"] = cd.arch.channel_width;
    r["latency"] = cd.design.dfg.depth();
    r["nodes"] = int(cd.design.dfg.nodes.size());
    int voters = 0;
    for (const DfgNode &n : cd.design.dfg.nodes)
        if (n.op == Op::Vote)
            ++voters;
    r["voters"] = voters;
    BitBreakdown bits = layout_breakdown(cd.layout);
    r["config_bits"] = {{"total", bits.total}, {"fu", bits.fu}, {"cb", bits.cb}, {"sb", bits.sb}};
    r["placement"] = placement_json(cd);
    r["hpwl"] = cd.placement.hpwl;
    r["routing"] = {{"nets", int(cd.routing.nets.size())},
                    {"iterations", cd.routing.iterations},
                    {"wire_segments", cd.routing.wire_segments}};
    int min_sep = -1;
    const DataflowGraph &g = cd.design.dfg;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.nodes[i].replica < 0)
            continue;
        for (size_t j = i + 1; j < g.nodes.size(); ++j) {
            if (g.nodes[j].replica < 0 || g.nodes[j].origin != g.nodes[i].origin ||
                g.nodes[j].replica == g.nodes[i].replica)
                continue;
            int d = chebyshev(cd.placement.cell_of[i], cd.placement.cell_of[j]);
            if (min_sep < 0 || d < min_sep)
                min_sep = d;
        }
    }
    r["separation"] = {{"required", cd.arch.separation},
                       {"min_replica_distance", min_sep},
                       {"adjacent_replica_conflicts",
                        adjacent_replica_conflicts(cd.design, cd.placement)}};
    return r;
}

std::string flags_column(const std::vector<CellFlag> &flags)
{
    std::ostringstream os;
    for (size_t i = 0; i < flags.size(); ++i) {
        if (i)
            os << ";";
        os << (flags[i].kind == FlagKind::Dwc ? "dwc@" : "edc@") << flags[i].cell.row << ","
           << flags[i].cell.col;
    }
    return os.str();
}

std::string sim_csv(const CompiledDesign &cd, const SimResult &res)
{
    std::ostringstream os;
    os << "cycle";
    for (const OutputPort &o : cd.design.dfg.outputs)
        os << "," << o.id;
    os << ",flags\n";
    for (size_t v = 0; v < res.outputs.size(); ++v) {
        os << v;
        for (Word w : res.outputs[v])
            os << "," << w;
        os << "," << flags_column(res.flags[v]) << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------

int cmd_size(const DesignArgs &dargs, uint64_t seed, const std::string &json_out)
{
    Manifest manifest;
    manifest.seed = seed;
    LoadedDesign d = load_design(dargs, manifest);

    ResourceCounts rc = size_requirements(d.kernels, d.mode);
    FabricArch minimal = minimal_fabric(rc, dargs.channel_width, d.kernels.front().data_width,
                                        dargs.separation, "minimal");
    BitBreakdown bits = layout_breakdown(bit_layout(minimal));

    std::cout << "kind      cells\n";
    for (FuKind k : {FuKind::Mul, FuKind::Add, FuKind::Sub, FuKind::SubAbs, FuKind::Vote}) {
        if (rc.of(k) == 0 && k != FuKind::Vote)
            continue;
        std::printf("%-9s %d\n", fu_kind_name(k), rc.of(k));
    }
    std::printf("grid      %dx%d (%d tiles)\n", minimal.rows, minimal.cols, minimal.tile_count());
    std::printf("config bits total=%d fu=%d cb=%d sb=%d routing_share=%.1f%%\n", bits.total,
                bits.fu, bits.cb, bits.sb, 100.0 * double(bits.cb + bits.sb) / double(bits.total));

    if (!json_out.empty()) {
        manifest.outputs.push_back(json_out);
        json out;
        out["manifest"] = manifest.to_json();
        out["counts"] = counts_json(rc);
        out["grid"] = {{"rows", minimal.rows}, {"cols", minimal.cols}};
        out["config_bits"] = {
            {"total", bits.total}, {"fu", bits.fu}, {"cb", bits.cb}, {"sb", bits.sb}};
        spit(json_out, out.dump(2) + "\n");
    }
    return 0;
}

int cmd_compile(const DesignArgs &dargs, uint64_t seed, const std::string &out_prefix)
{
    Manifest manifest;
    manifest.seed = seed;
    LoadedDesign d = load_design(dargs, manifest);

    json reports = json::array();
    for (const DataflowGraph &kernel : d.kernels) {
        CompiledDesign cd = compile(kernel, d.arch, d.mode, seed);
        std::string stem = out_prefix;
        if (d.kernels.size() > 1)
            stem += "_" + kernel.name;
        const std::string bit_path = stem + ".rovb";
        write_bitstream_file(bit_path, cd.bitstream);
        manifest.outputs.push_back(bit_path);
        json r = compile_report(cd);
        r["bitstream"] = bit_path;
        reports.push_back(r);
        std::cout << "compiled " << kernel.name << ": " << cd.design.dfg.nodes.size()
                  << " nodes, hpwl " << cd.placement.hpwl << ", "
                  << cd.routing.iterations << " routing iterations -> " << bit_path << "\n";
    }

    const std::string report_path = out_prefix + ".json";
    manifest.outputs.push_back(report_path);
    json out;
    out["manifest"] = manifest.to_json();
    out["designs"] = reports;
    spit(report_path, out.dump(2) + "\n");
    return 0;
}

int cmd_sim(const DesignArgs &dargs, uint64_t seed, const std::string &vectors_path,
            int random_count, const std::string &bitstream_path,
            const std::vector<std::string> &faulty, const std::vector<int> &flips,
            const std::string &out_csv, const std::string &report_path)
{
    Manifest manifest;
    manifest.seed = seed;
    LoadedDesign d = load_design(dargs, manifest);
    if (d.kernels.size() != 1)
        throw InputError("sim takes exactly one kernel");

    CompiledDesign cd = compile(d.kernels[0], d.arch, d.mode, seed);
    if (!bitstream_path.empty()) {
        Bitstream loaded = read_bitstream_file(bitstream_path, cd.layout);
        manifest.add_input(bitstream_path, slurp(bitstream_path));
        DecodeReport dec;
        cd.config = decode_bitstream(cd.layout, loaded, &dec);
        cd.bitstream = loaded;
        if (dec.any_uncorrectable)
            std::cerr << "warning: loaded bitstream has uncorrectable SECDED words\n";
    }

    std::vector<std::vector<Word>> vectors;
    if (!vectors_path.empty())
        vectors = load_vectors(vectors_path, int(d.kernels[0].inputs.size()),
                               d.kernels[0].data_width);
    else
        vectors = random_vectors(random_count, int(d.kernels[0].inputs.size()),
                                 d.kernels[0].data_width, seed);
    if (!vectors_path.empty())
        manifest.add_input(vectors_path, slurp(vectors_path));
    manifest.parameters["vectors"] = int(vectors.size());

    FaultState faults;
    faults.flipped_bits = flips;
    faults.dead_cells = parse_faulty(faulty);

    SimResult res = simulate(cd, vectors, faults);
    EquivalenceReport eq = compare_golden(res, cd.kernel, vectors);

    if (!out_csv.empty()) {
        manifest.outputs.push_back(out_csv);
        spit(out_csv, sim_csv(cd, res));
    } else {
        std::cout << sim_csv(cd, res);
    }

    if (!report_path.empty()) {
        manifest.outputs.push_back(report_path);
        json out;
        out["manifest"] = manifest.to_json();
        out["latency"] = res.latency;
        out["refused"] = res.refused;
        out["equivalence"] = equiv_class_name(eq.cls);
        out["mismatched_vectors"] = eq.mismatched;
        out["flagged_vectors"] = eq.flagged;
        spit(report_path, out.dump(2) + "\n");
    }
    std::cerr << "sim: " << vectors.size() << " vectors, latency " << res.latency << ", "
              << equiv_class_name(eq.cls) << "\n";
    return 0;
}

int cmd_inject(const DesignArgs &dargs, uint64_t seed, const std::string &bits_spec,
               const std::string &vectors_path, int random_count, int jobs,
               const std::string &out_prefix, const std::string &write_bitstream)
{
    Manifest manifest;
    manifest.seed = seed;
    LoadedDesign d = load_design(dargs, manifest);
    if (d.kernels.size() != 1)
        throw InputError("inject takes exactly one kernel");

    CompiledDesign cd = compile(d.kernels[0], d.arch, d.mode, seed);

    CampaignScope scope = CampaignScope::all();
    if (bits_spec == "all") {
        scope = CampaignScope::all();
    } else if (bits_spec.rfind("random:", 0) == 0) {
        scope = CampaignScope::random(std::stoi(bits_spec.substr(7)));
    } else if (bits_spec.rfind("kind:", 0) == 0) {
        const std::string kind = bits_spec.substr(5);
        BitKind bk;
        if (kind == "fu_op")
            bk = BitKind::FuOp;
        else if (kind == "fu_replica")
            bk = BitKind::FuReplica;
        else if (kind == "cb_select")
            bk = BitKind::CbSelect;
        else if (kind == "sb_switch")
            bk = BitKind::SbSwitch;
        else
            throw InputError("unknown resource kind '" + kind + "'");
        scope = CampaignScope::resource(bk);
    } else {
        std::vector<int> bits;
        std::istringstream ls(bits_spec);
        std::string tok;
        while (std::getline(ls, tok, ','))
            bits.push_back(std::stoi(tok));
        scope = CampaignScope::list(bits);
        if (!write_bitstream.empty()) {
            Bitstream flipped = inject(cd.bitstream, bits, cd.layout);
            write_bitstream_file(write_bitstream, flipped);
            manifest.outputs.push_back(write_bitstream);
        }
    }

    std::vector<std::vector<Word>> vectors;
    if (!vectors_path.empty()) {
        vectors = load_vectors(vectors_path, int(d.kernels[0].inputs.size()),
                               d.kernels[0].data_width);
        manifest.add_input(vectors_path, slurp(vectors_path));
    } else {
        vectors = random_vectors(random_count, int(d.kernels[0].inputs.size()),
                                 d.kernels[0].data_width, seed);
    }
    manifest.parameters["vectors"] = int(vectors.size());
    manifest.parameters["bits"] = bits_spec;
    manifest.parameters["jobs"] = jobs;

    SensitivityMap map = run_campaign(cd, vectors, scope, seed, jobs);

    const std::string csv_path = out_prefix + ".csv";
    manifest.outputs.push_back(csv_path);
    spit(csv_path, sensitivity_csv(map, cd.layout));

    json totals = json::object();
    auto t = map.totals(cd.layout);
    for (BitKind k :
         {BitKind::FuOp, BitKind::FuReplica, BitKind::CbSelect, BitKind::SbSwitch}) {
        json per = json::object();
        for (BitClass c : {BitClass::Benign, BitClass::Detected, BitClass::Sdc}) {
            auto it = t.find({k, c});
            per[bit_class_name(c)] = it == t.end() ? 0 : it->second;
        }
        totals[bit_kind_name(k)] = per;
    }

    const std::string json_path = out_prefix + ".json";
    manifest.outputs.push_back(json_path);
    json out;
    out["manifest"] = manifest.to_json();
    out["scope"] = map.scope;
    out["classified_bits"] = int(map.entries.size());
    out["vectors"] = map.vectors;
    out["runtime_simulations"] = map.simulations;
    out["totals"] = totals;
    spit(json_path, out.dump(2) + "\n");

    int sdc = 0, detected = 0;
    for (const auto &e : map.entries) {
        sdc += e.cls == BitClass::Sdc;
        detected += e.cls == BitClass::Detected;
    }
    std::cerr << "inject: " << map.entries.size() << " bits classified, " << sdc << " sdc, "
              << detected << " detected\n";
    return 0;
}

int cmd_scrub(const DesignArgs &dargs, uint64_t seed, const std::string &upsets_path,
              int random_upsets, const std::string &level, const std::string &schedule_name,
              int64_t period, int64_t tf, int64_t tw, int device_mult,
              const std::string &out_path)
{
    Manifest manifest;
    manifest.seed = seed;
    LoadedDesign d = load_design(dargs, manifest);
    if (d.kernels.size() != 1)
        throw InputError("scrub takes exactly one kernel");

    CompiledDesign cd = compile(d.kernels[0], d.arch, d.mode, seed);
    DeviceModel device = build_device_model(cd.arch, cd.layout, cd.design, cd.placement,
                                            cd.bitstream, device_mult);

    ScrubConfig cfg;
    cfg.upper = level == "upper" || level == "both";
    cfg.lower = level == "lower" || level == "both";
    if (!cfg.upper && !cfg.lower)
        throw InputError("--level must be upper, lower or both");
    if (!scrub_schedule_from_name(schedule_name, cfg.schedule))
        throw InputError("--schedule must be round_robin or priority");
    if (period < 1 || tf < 1 || tw < 1)
        throw InputError("--period, --tf and --tw must be positive");
    cfg.period = period;
    cfg.frame_check_cost = tf;
    cfg.frame_write_cost = tw;

    UpsetTrace trace;
    if (!upsets_path.empty()) {
        std::string text = slurp(upsets_path);
        manifest.add_input(upsets_path, text);
        trace = parse_upset_trace(text);
    } else {
        trace = random_trace(cd.layout, &device, random_upsets,
                             int64_t(cd.layout.frame_count()) * tf * 4, seed);
    }
    for (const UpsetEvent &e : trace.events) {
        const int limit =
            e.level == ScrubLevel::Upper ? cd.layout.total_bits : device.total_bits();
        if (e.bit < 0 || e.bit >= limit)
            throw InputError("trace bit " + std::to_string(e.bit) + " out of range for " +
                             scrub_level_name(e.level) + " level");
    }

    ScrubMemory upper = upper_memory(cd.layout, cd.bitstream, cd.design, cd.placement);
    ScrubMemory lower = lower_memory(device);
    ScrubReport rep = run_two_level(cfg.upper ? &upper : nullptr, cfg.lower ? &lower : nullptr,
                                    trace, cfg);

    json events = json::array();
    for (const ScrubEventOutcome &o : rep.events) {
        json e;
        e["cycle"] = o.upset.cycle;
        e["level"] = scrub_level_name(o.upset.level);
        e["bit"] = o.upset.bit;
        e["detected"] = o.detected;
        e["corrected"] = o.corrected;
        e["uncorrectable"] = o.uncorrectable;
        e["via_reconfig"] = o.via_reconfig;
        events.push_back(e);
    }
    json passes = json::array();
    for (const ScrubPass &p : rep.passes) {
        json e;
        e["level"] = scrub_level_name(p.level);
        e["index"] = p.index;
        e["start"] = p.start;
        e["end"] = p.end;
        e["frames"] = p.frames;
        e["corrected_frames"] = p.corrected_frames;
        e["uncorrectable_words"] = p.uncorrectable_words;
        passes.push_back(e);
    }

    manifest.parameters["level"] = level;
    manifest.parameters["schedule"] = schedule_name;
    manifest.parameters["period"] = period;
    manifest.parameters["tf"] = tf;
    manifest.parameters["tw"] = tw;
    manifest.parameters["device_frames"] = device.frame_count;
    manifest.outputs.push_back(out_path);

    json out;
    out["manifest"] = manifest.to_json();
    out["events"] = events;
    out["passes"] = passes;
    out["reconfigurations"] = rep.reconfigurations;
    out["detection_latency"] = {
        {"mean_upper", rep.mean_detection_latency_upper},
        {"max_upper", rep.max_detection_latency_upper},
        {"mean_lower", rep.mean_detection_latency_lower},
        {"max_lower", rep.max_detection_latency_lower},
    };
    out["clean_pass_duration"] = {{"upper", rep.clean_pass_duration_upper},
                                  {"lower", rep.clean_pass_duration_lower}};
    spit(out_path, out.dump(2) + "\n");
    std::cerr << "scrub: " << rep.events.size() << " upsets, " << rep.reconfigurations
              << " reconfigurations\n";
    return 0;
}

int cmd_repair(const DesignArgs &dargs, uint64_t seed, const std::vector<std::string> &faulty,
               int precompiled, const std::vector<std::string> &spares_spec,
               const std::string &out_prefix)
{
    Manifest manifest;
    manifest.seed = seed;
    LoadedDesign d = load_design(dargs, manifest);
    if (d.kernels.size() != 1)
        throw InputError("repair takes exactly one kernel");

    json out;
    if (precompiled > 0) {
        std::map<FuKind, int> policy;
        for (const std::string &s : spares_spec) {
            auto colon = s.find(':');
            if (colon == std::string::npos)
                throw InputError("--spares expects <kind>:<n>");
            FuKind kind;
            if (!fu_kind_from_name(s.substr(0, colon), kind))
                throw InputError("unknown FU kind in --spares");
            policy[kind] = std::stoi(s.substr(colon + 1));
        }
        RepairPlan plan = precompile(d.kernels[0], d.arch, d.mode, policy, precompiled, seed);
        json alts = json::array();
        for (size_t i = 0; i < plan.alternates.size(); ++i) {
            const auto &a = plan.alternates[i];
            const std::string path = out_prefix + ".alt" + std::to_string(i) + ".rovb";
            write_bitstream_file(path, a.bitstream);
            manifest.outputs.push_back(path);
            json e;
            json ex = json::array();
            for (const CellCoord &c : a.excluded)
                ex.push_back({{"row", c.row}, {"col", c.col}});
            e["excluded"] = ex;
            e["bitstream"] = path;
            e["changed_frames"] = a.changed_frames;
            alts.push_back(e);
        }
        out["plan"] = {{"granularity", repair_granularity_name(plan.granularity)},
                       {"configurations", alts},
                       {"coverage", plan.coverage},
                       {"spares", counts_json(plan.spares)},
                       {"reconfig_frames_per_repair",
                        plan.granularity == RepairGranularity::FullOverlay
                            ? int(plan.base.bitstream.frames.size())
                            : -1}};
        std::cerr << "repair: " << plan.alternates.size() << " precompiled configurations, "
                  << "coverage " << plan.coverage << "\n";
    }

    if (!faulty.empty()) {
        std::set<CellCoord> cells = parse_faulty(faulty);
        RepairOutcome res = dynamic_repair(d.kernels[0], d.arch, d.mode, cells, seed);
        const std::string path = out_prefix + ".repaired.rovb";
        write_bitstream_file(path, res.compiled.bitstream);
        manifest.outputs.push_back(path);
        json f = json::array();
        for (const CellCoord &c : cells)
            f.push_back({{"row", c.row}, {"col", c.col}});
        out["dynamic"] = {{"faulty", f},
                          {"bitstream", path},
                          {"changed_frames", res.changed_frames},
                          {"compile_work", res.compile_work},
                          {"oracle_equivalent", true}};
        std::cerr << "repair: dynamic repair succeeded, " << res.changed_frames
                  << " frames changed\n";
    }

    if (out.empty())
        throw InputError("repair needs --faulty and/or --precompiled");

    for (const std::string &s : faulty)
        manifest.parameters["faulty"].push_back(s);
    manifest.parameters["precompiled"] = precompiled;
    const std::string report = out_prefix + ".json";
    manifest.outputs.push_back(report);
    json doc;
    doc["manifest"] = manifest.to_json();
    for (auto &[key, value] : out.items())
        doc[key] = value;
    spit(report, doc.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"reliability-aware overlay toolchain"};
    app.require_subcommand(1);
    app.fallthrough(); // global options may follow the subcommand

    uint64_t seed = base_seed();
    app.add_option("--seed", seed, "global RNG seed (overrides RELIC_SEED)");

    // size
    auto *size_cmd = app.add_subcommand("size", "resource requirements of a kernel set");
    DesignArgs size_args;
    size_args.attach(size_cmd);
    std::string size_json;
    size_cmd->add_option("--json", size_json, "also write a JSON report");

    // compile
    auto *compile_cmd = app.add_subcommand("compile", "place, route and generate a bitstream");
    DesignArgs compile_args;
    compile_args.attach(compile_cmd);
    std::string compile_out = "design";
    compile_cmd->add_option("-o,--out", compile_out, "output prefix");

    // sim
    auto *sim_cmd = app.add_subcommand("sim", "cycle-level simulation of a configured fabric");
    DesignArgs sim_args;
    sim_args.attach(sim_cmd);
    std::string sim_vectors, sim_bitstream, sim_csv_out, sim_report;
    int sim_random = 16;
    std::vector<std::string> sim_faulty;
    std::vector<int> sim_flips;
    sim_cmd->add_option("--vectors", sim_vectors, "input vectors CSV (one row per cycle)");
    sim_cmd->add_option("--random-vectors", sim_random, "number of random vectors when no CSV");
    sim_cmd->add_option("--bitstream", sim_bitstream, "simulate this bitstream file");
    sim_cmd->add_option("--faulty", sim_faulty, "permanently faulty cell fu:<row>,<col>");
    sim_cmd->add_option("--flip", sim_flips, "config bit indices to flip before simulation");
    sim_cmd->add_option("-o,--out", sim_csv_out, "output CSV path (default stdout)");
    sim_cmd->add_option("--report", sim_report, "also write a JSON report");

    // inject
    auto *inject_cmd = app.add_subcommand("inject", "SEU sensitivity campaign");
    DesignArgs inject_args;
    inject_args.attach(inject_cmd);
    std::string inject_bits = "all", inject_vectors, inject_out = "sensitivity";
    std::string inject_write_bs;
    int inject_random = 32, inject_jobs = 1;
    inject_cmd->add_option("--bits", inject_bits,
                           "all | random:<n> | kind:<resource> | <i>,<j>,...");
    inject_cmd->add_option("--vectors", inject_vectors, "input vectors CSV");
    inject_cmd->add_option("--random-vectors", inject_random,
                           "number of random vectors when no CSV");
    inject_cmd->add_option("--jobs", inject_jobs, "parallel workers");
    inject_cmd->add_option("-o,--out", inject_out, "output prefix (.csv and .json)");
    inject_cmd->add_option("--write-bitstream", inject_write_bs,
                           "with an explicit bit list: write the flipped bitstream");

    // scrub
    auto *scrub_cmd = app.add_subcommand("scrub", "two-level scrubbing simulation");
    DesignArgs scrub_args;
    scrub_args.attach(scrub_cmd);
    std::string scrub_upsets, scrub_level = "both", scrub_schedule = "round_robin";
    std::string scrub_out = "scrub.json";
    int scrub_random = 16, scrub_device_mult = 10;
    int64_t scrub_period = 1, scrub_tf = 64, scrub_tw = 64;
    scrub_cmd->add_option("--upsets", scrub_upsets, "upset trace CSV (cycle,level,bit_index)");
    scrub_cmd->add_option("--random-upsets", scrub_random, "random upset count when no CSV");
    scrub_cmd->add_option("--level", scrub_level, "upper|lower|both");
    scrub_cmd->add_option("--schedule", scrub_schedule, "round_robin|priority");
    scrub_cmd->add_option("--period", scrub_period, "cycles between pass starts");
    scrub_cmd->add_option("--tf", scrub_tf, "frame read-check cost (cycles)");
    scrub_cmd->add_option("--tw", scrub_tw, "frame rewrite cost (cycles)");
    scrub_cmd->add_option("--device-frames", scrub_device_mult,
                          "device frames per overlay frame (>= 10)");
    scrub_cmd->add_option("-o,--out", scrub_out, "report JSON path");

    // repair
    auto *repair_cmd = app.add_subcommand("repair", "spare-based fault repair");
    DesignArgs repair_args;
    repair_args.attach(repair_cmd);
    std::vector<std::string> repair_faulty, repair_spares;
    int repair_precompiled = 0;
    std::string repair_out = "repair";
    repair_cmd->add_option("--faulty", repair_faulty, "faulty cell fu:<row>,<col>");
    repair_cmd->add_option("--precompiled", repair_precompiled,
                           "number of precompiled alternate configurations");
    repair_cmd->add_option("--spares", repair_spares, "spare policy <kind>:<n>");
    repair_cmd->add_option("-o,--out", repair_out, "output prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (size_cmd->parsed())
            return cmd_size(size_args, seed, size_json);
        if (compile_cmd->parsed())
            return cmd_compile(compile_args, seed, compile_out);
        if (sim_cmd->parsed())
            return cmd_sim(sim_args, seed, sim_vectors, sim_random, sim_bitstream, sim_faulty,
                           sim_flips, sim_csv_out, sim_report);
        if (inject_cmd->parsed())
            return cmd_inject(inject_args, seed, inject_bits, inject_vectors, inject_random,
                              inject_jobs, inject_out, inject_write_bs);
        if (scrub_cmd->parsed())
            return cmd_scrub(scrub_args, seed, scrub_upsets, scrub_random, scrub_level,
                             scrub_schedule, scrub_period, scrub_tf, scrub_tw, scrub_device_mult,
                             scrub_out);
        if (repair_cmd->parsed())
            return cmd_repair(repair_args, seed, repair_faulty, repair_precompiled, repair_spares,
                              repair_out);
    } catch (const InputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const InfeasibleError &e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const UnroutableError &e) {
        std::cerr << "unroutable: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
