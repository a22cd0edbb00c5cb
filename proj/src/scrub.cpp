#include "relic/scrub.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "relic/secded.hpp"

namespace relic {

const char *scrub_level_name(ScrubLevel l) { return l == ScrubLevel::Upper ? "upper" : "lower"; }

const char *scrub_schedule_name(ScrubSchedule s)
{
    return s == ScrubSchedule::RoundRobin ? "round_robin" : "priority";
}

bool scrub_schedule_from_name(std::string_view name, ScrubSchedule &out)
{
    if (name == "round_robin") {
        out = ScrubSchedule::RoundRobin;
        return true;
    }
    if (name == "priority") {
        out = ScrubSchedule::Priority;
        return true;
    }
    return false;
}

UpsetTrace parse_upset_trace(const std::string &csv)
{
    UpsetTrace trace;
    std::istringstream is(csv);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        if (line_no == 1 && line.find("cycle") != std::string::npos)
            continue; // header
        std::istringstream ls(line);
        std::string cyc, lvl, bit;
        if (!std::getline(ls, cyc, ',') || !std::getline(ls, lvl, ',') ||
            !std::getline(ls, bit, ','))
            throw InputError("trace line " + std::to_string(line_no) +
                             ": expected cycle,level,bit_index");
        UpsetEvent e;
        try {
            e.cycle = std::stoll(cyc);
            e.bit = std::stoi(bit);
        } catch (const std::exception &) {
            throw InputError("trace line " + std::to_string(line_no) + ": bad number");
        }
        lvl.erase(std::remove_if(lvl.begin(), lvl.end(), ::isspace), lvl.end());
        if (lvl == "upper")
            e.level = ScrubLevel::Upper;
        else if (lvl == "lower")
            e.level = ScrubLevel::Lower;
        else
            throw InputError("trace line " + std::to_string(line_no) + ": level must be upper|lower");
        if (!trace.events.empty() && e.cycle < trace.events.back().cycle)
            throw InputError("trace line " + std::to_string(line_no) +
                             ": cycles must be non-decreasing");
        trace.events.push_back(e);
    }
    return trace;
}

std::string upset_trace_csv(const UpsetTrace &trace)
{
    std::ostringstream os;
    os << "cycle,level,bit_index\n";
    for (const UpsetEvent &e : trace.events)
        os << e.cycle << "," << scrub_level_name(e.level) << "," << e.bit << "\n";
    return os.str();
}

UpsetTrace random_trace(const BitstreamLayout &layout, const DeviceModel *device, int count,
                        int64_t max_cycle, uint64_t seed)
{
    Rng rng(seed ^ 0x7ace7aceULL);
    UpsetTrace trace;
    std::vector<int64_t> cycles(count);
    for (int64_t &c : cycles)
        c = int64_t(rng() % uint64_t(std::max<int64_t>(1, max_cycle)));
    std::sort(cycles.begin(), cycles.end());
    for (int i = 0; i < count; ++i) {
        UpsetEvent e;
        e.cycle = cycles[i];
        if (device && (rng() & 1)) {
            e.level = ScrubLevel::Lower;
            e.bit = int(rng() % uint64_t(device->total_bits()));
        } else {
            e.level = ScrubLevel::Upper;
            e.bit = int(rng() % uint64_t(layout.total_bits));
        }
        trace.events.push_back(e);
    }
    return trace;
}

ScrubMemory upper_memory(const BitstreamLayout &layout, const Bitstream &bitstream,
                         const HardenedDesign &design, const Placement &placement)
{
    ScrubMemory mem;
    mem.level = ScrubLevel::Upper;
    mem.frames = bitstream.frames;
    Bitstream pristine = bitstream;
    pristine.recompute_check_bits();
    mem.golden = pristine.frames;
    mem.bit_location.reserve(layout.total_bits);
    for (int b = 0; b < layout.total_bits; ++b) {
        BitInfo info = layout.bit(b);
        mem.bit_location.push_back({info.frame, info.offset});
    }
    std::vector<uint8_t> essential = essential_upper_bits(layout, design, placement, bitstream);
    mem.frame_essential.assign(layout.frame_count(), 0);
    for (int b = 0; b < layout.total_bits; ++b)
        if (essential[b])
            mem.frame_essential[mem.bit_location[b].first] = 1;
    return mem;
}

ScrubMemory lower_memory(const DeviceModel &model)
{
    ScrubMemory mem;
    mem.level = ScrubLevel::Lower;
    Frame empty;
    empty.words.assign(size_t(model.bits_per_frame) / 64, 0);
    empty.check.assign(empty.words.size(), secded_check_bits(0));
    mem.frames.assign(model.frame_count, empty);
    mem.golden = mem.frames;
    mem.bit_location = model.bit_location;
    mem.frame_essential = model.frame_essential;
    return mem;
}

std::vector<int> schedule_order(const ScrubMemory &mem, ScrubSchedule schedule)
{
    std::vector<int> order;
    order.reserve(mem.frames.size());
    if (schedule == ScrubSchedule::Priority) {
        for (size_t f = 0; f < mem.frames.size(); ++f)
            if (mem.frame_essential.size() > f && mem.frame_essential[f])
                order.push_back(int(f));
        for (size_t f = 0; f < mem.frames.size(); ++f)
            if (!(mem.frame_essential.size() > f && mem.frame_essential[f]))
                order.push_back(int(f));
    } else {
        for (size_t f = 0; f < mem.frames.size(); ++f)
            order.push_back(int(f));
    }
    return order;
}

namespace {

struct LevelSim {
    ScrubMemory mem;
    const ScrubConfig &cfg;
    std::vector<std::pair<int64_t, int>> events; // (cycle, event index in report)
    std::vector<ScrubEventOutcome> &outcomes;
    std::vector<ScrubPass> &passes;
    int &reconfigurations;

    size_t cursor = 0;                       // next unapplied event
    std::multimap<std::pair<int, int>, int> open; // (frame, offset) -> event index
    int dirty_frames = 0;
    std::vector<int> frame_pending; // open flips per frame
    int64_t clean_duration = 0;

    LevelSim(ScrubMemory m, const ScrubConfig &c, std::vector<ScrubEventOutcome> &out,
             std::vector<ScrubPass> &p, int &reconf)
        : mem(std::move(m)), cfg(c), outcomes(out), passes(p), reconfigurations(reconf)
    {
        frame_pending.assign(mem.frames.size(), 0);
        clean_duration = int64_t(mem.frames.size()) * cfg.frame_check_cost;
    }

    void apply_events_before(int64_t cycle)
    {
        while (cursor < events.size() && events[cursor].first < cycle) {
            const int idx = events[cursor].second;
            const UpsetEvent &u = outcomes[idx].upset;
            if (u.bit < 0 || u.bit >= int(mem.bit_location.size()))
                throw InputError("trace bit " + std::to_string(u.bit) + " out of range");
            auto [frame, offset] = mem.bit_location[u.bit];
            mem.frames[frame].words[offset / 64] ^= uint64_t(1) << (offset % 64);
            if (frame_pending[frame]++ == 0)
                ++dirty_frames;
            open.insert({{frame, offset}, idx});
            ++cursor;
        }
    }

    void close_frame_events(int frame, int64_t detected, int64_t corrected, bool uncorrectable,
                            bool via_reconfig)
    {
        for (auto it = open.begin(); it != open.end();) {
            if (it->first.first != frame) {
                ++it;
                continue;
            }
            ScrubEventOutcome &o = outcomes[it->second];
            o.detected = detected;
            o.corrected = corrected;
            o.uncorrectable = uncorrectable;
            o.via_reconfig = via_reconfig;
            it = open.erase(it);
        }
        if (frame_pending[frame] > 0) {
            frame_pending[frame] = 0;
            --dirty_frames;
        }
    }

    void full_reconfiguration(int64_t start, int64_t &time)
    {
        const int64_t end = start + int64_t(mem.frames.size()) * cfg.frame_write_cost;
        mem.frames = mem.golden;
        for (auto &[key, idx] : open) {
            ScrubEventOutcome &o = outcomes[idx];
            if (o.detected < 0)
                o.detected = end;
            o.corrected = end;
            o.via_reconfig = true;
        }
        open.clear();
        std::fill(frame_pending.begin(), frame_pending.end(), 0);
        dirty_frames = 0;
        ++reconfigurations;
        time = end;
    }

    void run()
    {
        if (events.empty())
            return;
        const std::vector<int> order = schedule_order(mem, cfg.schedule);
        int64_t pass_start = 0;
        int pass_index = 0;
        while (cursor < events.size() || !open.empty()) {
            // Fast-forward over passes guaranteed clean.
            if (open.empty() && dirty_frames == 0 && cursor < events.size()) {
                const int64_t stride = std::max(clean_duration, cfg.period);
                if (events[cursor].first >= pass_start + clean_duration) {
                    const int64_t skip = (events[cursor].first - pass_start) / stride;
                    if (skip > 0) {
                        pass_start += skip * stride;
                        pass_index += int(skip);
                    }
                }
            }

            ScrubPass pass;
            pass.level = mem.level;
            pass.index = pass_index;
            pass.start = pass_start;
            pass.frames = int(order.size());
            int64_t time = pass_start;
            for (int frame : order) {
                const int64_t visit_end = time + cfg.frame_check_cost;
                // Upsets are visible if they arrive before the read completes.
                apply_events_before(visit_end);
                bool correctable = false, uncorrectable = false;
                Frame &f = mem.frames[frame];
                for (size_t w = 0; w < f.words.size(); ++w) {
                    Syndrome s = secded_syndrome(f.words[w], f.check[w]);
                    if (s.kind == Syndrome::Kind::Double)
                        uncorrectable = true;
                    else if (!s.clean())
                        correctable = true;
                }
                time = visit_end;
                if (uncorrectable) {
                    // mark events sitting in double-bit words before the
                    // reconfiguration closes everything else
                    std::set<int> double_words;
                    for (size_t w = 0; w < f.words.size(); ++w)
                        if (secded_syndrome(f.words[w], f.check[w]).uncorrectable())
                            double_words.insert(int(w));
                    pass.uncorrectable_words += int(double_words.size());
                    for (auto &[loc, idx] : open) {
                        if (loc.first == frame && double_words.count(loc.second / 64)) {
                            outcomes[idx].uncorrectable = true;
                            outcomes[idx].detected = visit_end;
                        }
                    }
                    full_reconfiguration(visit_end, time);
                } else if (correctable) {
                    // frame rewrite: flip the payload back and refresh checks
                    time += cfg.frame_write_cost;
                    for (size_t w = 0; w < f.words.size(); ++w) {
                        Syndrome s = secded_syndrome(f.words[w], f.check[w]);
                        if (s.kind == Syndrome::Kind::SingleData)
                            f.words[w] ^= uint64_t(1) << (s.data_bit % 64);
                        f.check[w] = secded_check_bits(f.words[w]);
                    }
                    ++pass.corrected_frames;
                    close_frame_events(frame, visit_end, time, false, false);
                } else {
                    // clean visit also closes mutually-cancelling flips
                    close_frame_events(frame, visit_end, visit_end, false, false);
                }
            }
            pass.end = time;
            if (pass.corrected_frames || pass.uncorrectable_words || passes.empty() ||
                passes.back().level != mem.level)
                passes.push_back(pass);
            ++pass_index;
            pass_start = std::max(time, pass_start + cfg.period);
        }
    }
};

} // namespace

ScrubReport run_two_level(const ScrubMemory *upper, const ScrubMemory *lower,
                          const UpsetTrace &trace, const ScrubConfig &cfg)
{
    ScrubReport report;
    report.events.reserve(trace.events.size());
    for (const UpsetEvent &e : trace.events) {
        ScrubEventOutcome o;
        o.upset = e;
        report.events.push_back(o);
    }

    for (ScrubLevel level : {ScrubLevel::Upper, ScrubLevel::Lower}) {
        const ScrubMemory *mem = level == ScrubLevel::Upper ? upper : lower;
        const bool enabled = level == ScrubLevel::Upper ? cfg.upper : cfg.lower;
        if (!mem || !enabled)
            continue;
        LevelSim sim(*mem, cfg, report.events, report.passes, report.reconfigurations);
        for (size_t i = 0; i < trace.events.size(); ++i)
            if (trace.events[i].level == level)
                sim.events.push_back({trace.events[i].cycle, int(i)});
        if (level == ScrubLevel::Upper)
            report.clean_pass_duration_upper = sim.clean_duration;
        else
            report.clean_pass_duration_lower = sim.clean_duration;
        sim.run();
    }

    int64_t sum_up = 0, n_up = 0, sum_lo = 0, n_lo = 0;
    for (const ScrubEventOutcome &o : report.events) {
        if (o.detected < 0)
            continue;
        const int64_t lat = o.detected - o.upset.cycle;
        if (o.upset.level == ScrubLevel::Upper) {
            sum_up += lat;
            ++n_up;
            report.max_detection_latency_upper = std::max(report.max_detection_latency_upper, lat);
        } else {
            sum_lo += lat;
            ++n_lo;
            report.max_detection_latency_lower = std::max(report.max_detection_latency_lower, lat);
        }
    }
    if (n_up)
        report.mean_detection_latency_upper = double(sum_up) / double(n_up);
    if (n_lo)
        report.mean_detection_latency_lower = double(sum_lo) / double(n_lo);
    return report;
}

} // namespace relic
