// Python bindings for the overlay toolchain: kernel IR, sizing, compile,
// simulation, SEU campaigns, scrubbing and repair.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relic/repair.hpp"
#include "relic/scrub.hpp"
#include "relic/seu.hpp"

namespace py = pybind11;
using namespace relic;

namespace {

DesignMode mode_of(const std::string &name)
{
    DesignMode m;
    if (!design_mode_from_name(name, m))
        throw InputError("unknown mode '" + name + "'");
    return m;
}

std::vector<std::vector<Word>> to_vectors(const std::vector<std::vector<int64_t>> &raw, int width)
{
    std::vector<std::vector<Word>> out;
    out.reserve(raw.size());
    for (const auto &row : raw) {
        std::vector<Word> v;
        v.reserve(row.size());
        for (int64_t x : row)
            v.push_back(Word(uint64_t(x)) & width_mask(width));
        out.push_back(std::move(v));
    }
    return out;
}

py::dict counts_dict(const ResourceCounts &rc)
{
    py::dict d;
    for (FuKind k : {FuKind::Mul, FuKind::Add, FuKind::Sub, FuKind::SubAbs, FuKind::Vote})
        if (rc.of(k) > 0 || k == FuKind::Vote)
            d[fu_kind_name(k)] = rc.of(k);
    return d;
}

py::dict sim_dict(const SimResult &r)
{
    py::dict d;
    d["latency"] = r.latency;
    d["refused"] = r.refused;
    py::list outs;
    for (const auto &row : r.outputs) {
        py::list o;
        for (Word w : row)
            o.append(w);
        outs.append(o);
    }
    d["outputs"] = outs;
    py::list flags;
    for (const auto &row : r.flags) {
        py::list f;
        for (const CellFlag &cf : row)
            f.append(py::make_tuple(cf.kind == FlagKind::Dwc ? "dwc" : "edc", cf.cell.row,
                                    cf.cell.col));
        flags.append(f);
    }
    d["flags"] = flags;
    return d;
}

} // namespace

PYBIND11_MODULE(_relic, m)
{
    m.doc() = "virtual overlay fabric toolchain: compile, harden, inject, scrub, repair";

    py::register_exception<InputError>(m, "InputError");
    py::register_exception<InfeasibleError>(m, "InfeasibleError");
    py::register_exception<UnroutableError>(m, "UnroutableError");

    py::class_<DataflowGraph>(m, "Kernel")
        .def_readonly("name", &DataflowGraph::name)
        .def_readonly("data_width", &DataflowGraph::data_width)
        .def_property_readonly("num_inputs",
                               [](const DataflowGraph &g) { return g.inputs.size(); })
        .def_property_readonly("num_nodes",
                               [](const DataflowGraph &g) { return g.nodes.size(); })
        .def_property_readonly("num_outputs",
                               [](const DataflowGraph &g) { return g.outputs.size(); })
        .def("depth", &DataflowGraph::depth)
        .def("node_ops",
             [](const DataflowGraph &g) {
                 py::list ops;
                 for (const DfgNode &n : g.nodes)
                     ops.append(op_name(n.op));
                 return ops;
             })
        .def("to_text", &to_dfg_text)
        .def("__repr__", [](const DataflowGraph &g) {
            return "<Kernel " + g.name + ": " + std::to_string(g.inputs.size()) + " inputs, " +
                   std::to_string(g.nodes.size()) + " nodes>";
        });

    py::class_<FabricArch>(m, "Fabric")
        .def_readonly("name", &FabricArch::name)
        .def_readonly("rows", &FabricArch::rows)
        .def_readonly("cols", &FabricArch::cols)
        .def_readonly("channel_width", &FabricArch::channel_width)
        .def_readonly("data_width", &FabricArch::data_width)
        .def_readonly("separation", &FabricArch::separation)
        .def_property_readonly("mode",
                               [](const FabricArch &a) { return fabric_mode_name(a.mode); })
        .def_property_readonly("num_cells", [](const FabricArch &a) { return a.cells.size(); })
        .def("to_text", &to_fab_text)
        .def("__repr__", [](const FabricArch &a) {
            return "<Fabric " + a.name + ": " + std::to_string(a.rows) + "x" +
                   std::to_string(a.cols) + ", " + std::to_string(a.cells.size()) + " cells>";
        });

    py::class_<CompiledDesign>(m, "Compiled")
        .def_property_readonly("kernel", [](const CompiledDesign &cd) { return cd.kernel; })
        .def_property_readonly("fabric", [](const CompiledDesign &cd) { return cd.arch; })
        .def_property_readonly("latency",
                               [](const CompiledDesign &cd) { return cd.design.dfg.depth(); })
        .def_property_readonly("hpwl", [](const CompiledDesign &cd) { return cd.placement.hpwl; })
        .def_property_readonly("config_bits",
                               [](const CompiledDesign &cd) { return cd.layout.total_bits; })
        .def_property_readonly("routing_iterations",
                               [](const CompiledDesign &cd) { return cd.routing.iterations; })
        .def("placement",
             [](const CompiledDesign &cd) {
                 py::list out;
                 for (size_t i = 0; i < cd.design.dfg.nodes.size(); ++i)
                     out.append(py::make_tuple(cd.design.dfg.nodes[i].id,
                                               cd.placement.cell_of[i].row,
                                               cd.placement.cell_of[i].col));
                 return out;
             })
        .def("bitstream_bytes",
             [](const CompiledDesign &cd) {
                 auto bytes = serialize_bitstream(cd.bitstream);
                 return py::bytes(reinterpret_cast<const char *>(bytes.data()), bytes.size());
             })
        .def("adjacent_replica_conflicts", [](const CompiledDesign &cd) {
            return adjacent_replica_conflicts(cd.design, cd.placement);
        });

    m.def("parse_dfg", &parse_dfg, py::arg("text"));
    m.def("parse_fabric", &parse_fabric, py::arg("text"));
    m.def("gen_conv", &gen_conv, py::arg("n"));
    m.def("gen_sad", &gen_sad, py::arg("n"));
    m.def("gen_sobel", &gen_sobel);

    m.def(
        "eval_dfg",
        [](const DataflowGraph &g, const std::vector<int64_t> &inputs) {
            std::vector<Word> in;
            in.reserve(inputs.size());
            for (int64_t x : inputs)
                in.push_back(Word(uint64_t(x)) & width_mask(g.data_width));
            py::list out;
            for (Word w : eval_dfg(g, in))
                out.append(w);
            return out;
        },
        py::arg("kernel"), py::arg("inputs"));

    m.def(
        "tmr_naive", [](const DataflowGraph &g) { return tmr_naive(g); }, py::arg("kernel"));

    m.def(
        "size_requirements",
        [](const std::vector<DataflowGraph> &kernels, const std::string &mode) {
            return counts_dict(size_requirements(kernels, mode_of(mode)));
        },
        py::arg("kernels"), py::arg("mode"));

    m.def(
        "minimal_fabric",
        [](const std::vector<DataflowGraph> &kernels, const std::string &mode, int channel_width,
           int separation, int extra_rows, int extra_cols,
           const std::map<std::string, int> &spares) {
            DesignMode dm = mode_of(mode);
            ResourceCounts rc = size_requirements(kernels, dm);
            CellVariant variant = CellVariant::Plain;
            if (dm == DesignMode::TmrFu)
                variant = CellVariant::Tmr;
            else if (dm == DesignMode::DwcFu)
                variant = CellVariant::Dwc;
            else if (dm == DesignMode::EdcFu)
                variant = CellVariant::Edc;
            for (auto &[name, n] : spares) {
                FuKind kind;
                if (!fu_kind_from_name(name, kind))
                    throw InputError("unknown FU kind '" + name + "'");
                rc.bump(kind, variant, n);
            }
            return sized_fabric(rc, channel_width, kernels.front().data_width, separation,
                                "auto", extra_rows, extra_cols);
        },
        py::arg("kernels"), py::arg("mode"), py::arg("channel_width") = 4,
        py::arg("separation") = 2, py::arg("extra_rows") = 0, py::arg("extra_cols") = 0,
        py::arg("spares") = std::map<std::string, int>{});

    m.def(
        "compile",
        [](const DataflowGraph &kernel, const FabricArch &arch, const std::string &mode,
           uint64_t seed) { return compile(kernel, arch, mode_of(mode), seed); },
        py::arg("kernel"), py::arg("fabric"), py::arg("mode"), py::arg("seed") = 0);

    m.def(
        "simulate",
        [](const CompiledDesign &cd, const std::vector<std::vector<int64_t>> &vectors,
           const std::vector<int> &flipped_bits,
           const std::vector<std::pair<int, int>> &dead_cells) {
            FaultState faults;
            faults.flipped_bits = flipped_bits;
            for (auto &[r, c] : dead_cells)
                faults.dead_cells.insert({r, c});
            SimResult res = simulate(cd, to_vectors(vectors, cd.kernel.data_width), faults);
            return sim_dict(res);
        },
        py::arg("compiled"), py::arg("vectors"), py::arg("flipped_bits") = std::vector<int>{},
        py::arg("dead_cells") = std::vector<std::pair<int, int>>{});

    m.def(
        "random_vectors",
        [](const DataflowGraph &kernel, int count, uint64_t seed) {
            py::list out;
            for (const auto &row :
                 random_vectors(count, int(kernel.inputs.size()), kernel.data_width, seed)) {
                py::list r;
                for (Word w : row)
                    r.append(w);
                out.append(r);
            }
            return out;
        },
        py::arg("kernel"), py::arg("count"), py::arg("seed") = 0);

    m.def(
        "run_campaign",
        [](const CompiledDesign &cd, const std::vector<std::vector<int64_t>> &vectors,
           const std::string &scope, uint64_t seed, int jobs) {
            CampaignScope s = CampaignScope::all();
            if (scope == "all")
                s = CampaignScope::all();
            else if (scope.rfind("random:", 0) == 0)
                s = CampaignScope::random(std::stoi(scope.substr(7)));
            else
                throw InputError("scope must be 'all' or 'random:<n>'");
            SensitivityMap map =
                run_campaign(cd, to_vectors(vectors, cd.kernel.data_width), s, seed, jobs);
            py::dict out;
            py::list entries;
            for (const auto &e : map.entries) {
                BitInfo info = cd.layout.bit(e.bit);
                entries.append(py::make_tuple(e.bit, bit_kind_name(info.kind, info.replica),
                                              bit_class_name(e.cls)));
            }
            out["entries"] = entries;
            py::dict totals;
            for (auto &[key, n] : map.totals(cd.layout)) {
                std::string name = std::string(bit_kind_name(key.first)) + "." +
                                   bit_class_name(key.second);
                totals[name.c_str()] = n;
            }
            out["totals"] = totals;
            out["csv"] = sensitivity_csv(map, cd.layout);
            return out;
        },
        py::arg("compiled"), py::arg("vectors"), py::arg("scope") = "all", py::arg("seed") = 0,
        py::arg("jobs") = 1);

    m.def(
        "scrub",
        [](const CompiledDesign &cd,
           const std::vector<std::tuple<int64_t, std::string, int>> &events,
           const std::string &schedule, int64_t period, int64_t tf, int64_t tw,
           int device_frames) {
            DeviceModel device = build_device_model(cd.arch, cd.layout, cd.design, cd.placement,
                                                    cd.bitstream, device_frames);
            ScrubMemory upper = upper_memory(cd.layout, cd.bitstream, cd.design, cd.placement);
            ScrubMemory lower = lower_memory(device);
            ScrubConfig cfg;
            if (!scrub_schedule_from_name(schedule, cfg.schedule))
                throw InputError("schedule must be round_robin or priority");
            cfg.period = period;
            cfg.frame_check_cost = tf;
            cfg.frame_write_cost = tw;
            UpsetTrace trace;
            for (auto &[cycle, level, bit] : events) {
                UpsetEvent e;
                e.cycle = cycle;
                e.level = level == "lower" ? ScrubLevel::Lower : ScrubLevel::Upper;
                e.bit = bit;
                trace.events.push_back(e);
            }
            ScrubReport rep = run_two_level(&upper, &lower, trace, cfg);
            py::dict out;
            py::list evs;
            for (const auto &o : rep.events) {
                py::dict e;
                e["cycle"] = o.upset.cycle;
                e["level"] = scrub_level_name(o.upset.level);
                e["bit"] = o.upset.bit;
                e["detected"] = o.detected;
                e["corrected"] = o.corrected;
                e["uncorrectable"] = o.uncorrectable;
                evs.append(e);
            }
            out["events"] = evs;
            out["reconfigurations"] = rep.reconfigurations;
            out["clean_pass_duration_upper"] = rep.clean_pass_duration_upper;
            out["clean_pass_duration_lower"] = rep.clean_pass_duration_lower;
            out["mean_detection_latency_upper"] = rep.mean_detection_latency_upper;
            out["mean_detection_latency_lower"] = rep.mean_detection_latency_lower;
            return out;
        },
        py::arg("compiled"), py::arg("events"), py::arg("schedule") = "round_robin",
        py::arg("period") = 1, py::arg("tf") = 64, py::arg("tw") = 64,
        py::arg("device_frames") = 10);

    m.def(
        "dynamic_repair",
        [](const DataflowGraph &kernel, const FabricArch &arch, const std::string &mode,
           const std::vector<std::pair<int, int>> &faulty, uint64_t seed) {
            std::set<CellCoord> cells;
            for (auto &[r, c] : faulty)
                cells.insert({r, c});
            RepairOutcome out = dynamic_repair(kernel, arch, mode_of(mode), cells, seed);
            return out.compiled;
        },
        py::arg("kernel"), py::arg("fabric"), py::arg("mode"), py::arg("faulty"),
        py::arg("seed") = 0);

    m.def(
        "precompile",
        [](const DataflowGraph &kernel, const FabricArch &arch, const std::string &mode,
           const std::map<std::string, int> &spares, int k, uint64_t seed) {
            std::map<FuKind, int> policy;
            for (auto &[name, n] : spares) {
                FuKind kind;
                if (!fu_kind_from_name(name, kind))
                    throw InputError("unknown FU kind '" + name + "'");
                policy[kind] = n;
            }
            RepairPlan plan = precompile(kernel, arch, mode_of(mode), policy, k, seed);
            py::dict out;
            out["coverage"] = plan.coverage;
            py::list alts;
            for (const auto &a : plan.alternates) {
                py::dict alt;
                py::list ex;
                for (const CellCoord &c : a.excluded)
                    ex.append(py::make_tuple(c.row, c.col));
                alt["excluded"] = ex;
                alt["changed_frames"] = a.changed_frames;
                auto bytes = serialize_bitstream(a.bitstream);
                alt["bitstream"] =
                    py::bytes(reinterpret_cast<const char *>(bytes.data()), bytes.size());
                alts.append(alt);
            }
            out["alternates"] = alts;
            return out;
        },
        py::arg("kernel"), py::arg("fabric"), py::arg("mode"), py::arg("spares"), py::arg("k"),
        py::arg("seed") = 0);

    m.attr("__version__") = "0.1.0";
}
