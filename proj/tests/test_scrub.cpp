#include "doctest.h"

#include "helpers.hpp"
#include "relic/scrub.hpp"

using namespace relic;
using relic::test::compile_on_minimal;
using relic::test::fabric_for;

namespace {

struct Rig {
    CompiledDesign cd;
    DeviceModel device;
    ScrubMemory upper;
    ScrubMemory lower;

    explicit Rig(int device_mult = 10)
        : cd(compile_on_minimal(gen_conv(2), DesignMode::TmrFu, 4)),
          device(build_device_model(cd.arch, cd.layout, cd.design, cd.placement, cd.bitstream,
                                    device_mult)),
          upper(upper_memory(cd.layout, cd.bitstream, cd.design, cd.placement)),
          lower(lower_memory(device))
    {
    }
};

} // namespace

TEST_CASE("trace CSV round trip and validation")
{
    UpsetTrace t;
    t.events = {{10, ScrubLevel::Upper, 3}, {20, ScrubLevel::Lower, 140}};
    UpsetTrace back = parse_upset_trace(upset_trace_csv(t));
    REQUIRE(back.events.size() == 2);
    CHECK(back.events[0].cycle == 10);
    CHECK(back.events[1].level == ScrubLevel::Lower);
    CHECK_THROWS_AS(parse_upset_trace("cycle,level,bit_index\n5,upper,1\n3,upper,2\n"),
                    InputError); // decreasing cycles
    CHECK_THROWS_AS(parse_upset_trace("1,middle,2\n"), InputError);
}

TEST_CASE("a single flipped bit is corrected within one pass")
{
    Rig rig;
    ScrubConfig cfg;
    cfg.lower = false;
    UpsetTrace trace;
    trace.events = {{100, ScrubLevel::Upper, 7}};
    ScrubReport rep = run_two_level(&rig.upper, nullptr, trace, cfg);
    REQUIRE(rep.events.size() == 1);
    const auto &e = rep.events[0];
    CHECK(!e.uncorrectable);
    CHECK(e.detected >= e.upset.cycle);
    CHECK(e.corrected >= e.detected);
    const int64_t frames = rig.cd.layout.frame_count();
    CHECK(e.corrected - e.upset.cycle <=
          frames * (cfg.frame_check_cost + cfg.frame_write_cost) + cfg.frame_write_cost);
    CHECK(rep.reconfigurations == 0);
}

TEST_CASE("two flips in one 64-bit word are uncorrectable and force reconfiguration")
{
    Rig rig;
    ScrubConfig cfg;
    cfg.lower = false;
    // bits 0 and 1 live in the same word of frame 0
    BitInfo a = rig.cd.layout.bit(0);
    BitInfo b = rig.cd.layout.bit(1);
    REQUIRE(a.frame == b.frame);
    REQUIRE(a.offset / 64 == b.offset / 64);
    UpsetTrace trace;
    trace.events = {{5, ScrubLevel::Upper, 0}, {6, ScrubLevel::Upper, 1}};
    ScrubReport rep = run_two_level(&rig.upper, nullptr, trace, cfg);
    CHECK(rep.reconfigurations == 1);
    for (const auto &e : rep.events) {
        CHECK(e.uncorrectable);
        CHECK(e.corrected >= e.detected);
    }
}

TEST_CASE("clean passes cost frames * T_f and change nothing")
{
    Rig rig;
    ScrubConfig cfg;
    cfg.lower = false;
    UpsetTrace trace;
    // one late upset so several clean passes run first
    const int64_t frames = rig.cd.layout.frame_count();
    trace.events = {{frames * cfg.frame_check_cost * 3 + 11, ScrubLevel::Upper, 2}};
    ScrubReport rep = run_two_level(&rig.upper, nullptr, trace, cfg);
    CHECK(rep.clean_pass_duration_upper == frames * cfg.frame_check_cost);
    // the first recorded pass is clean: no corrections, exact duration
    REQUIRE(!rep.passes.empty());
    const ScrubPass &p0 = rep.passes.front();
    if (p0.corrected_frames == 0 && p0.uncorrectable_words == 0)
        CHECK(p0.end - p0.start == frames * cfg.frame_check_cost);
    // the upset is still corrected
    CHECK(rep.events[0].corrected > 0);
}

TEST_CASE("every single-bit upset in a random trace is corrected within a pass")
{
    Rig rig;
    ScrubConfig cfg;
    UpsetTrace trace = random_trace(rig.cd.layout, &rig.device, 60,
                                    rig.cd.layout.frame_count() * 64 * 8, 99);
    ScrubReport rep = run_two_level(&rig.upper, &rig.lower, trace, cfg);
    REQUIRE(rep.events.size() == 60);
    for (const auto &e : rep.events) {
        if (e.uncorrectable)
            continue; // random double hits in one word may occur
        REQUIRE(e.corrected >= 0);
        REQUIRE(e.detected >= 0);
        REQUIRE(e.corrected >= e.detected);
        REQUIRE(e.detected >= e.upset.cycle);
        const int64_t frames = e.upset.level == ScrubLevel::Upper
                                   ? rig.cd.layout.frame_count()
                                   : rig.device.frame_count;
        // one worst-case pass (every frame rewritten), the tail of the
        // current visit, and any interleaved full reconfigurations
        const int64_t bound =
            frames * (cfg.frame_check_cost + cfg.frame_write_cost) + cfg.frame_check_cost +
            cfg.frame_write_cost +
            int64_t(rep.reconfigurations) * frames * cfg.frame_write_cost;
        if (!e.via_reconfig)
            REQUIRE(e.corrected - e.upset.cycle <= bound);
    }
}

TEST_CASE("lower-level pass is exactly 10x the upper at equal T_f")
{
    Rig rig(10);
    ScrubConfig cfg;
    UpsetTrace trace;
    trace.events = {{3, ScrubLevel::Upper, 1}, {4, ScrubLevel::Lower, 1}};
    ScrubReport rep = run_two_level(&rig.upper, &rig.lower, trace, cfg);
    CHECK(rep.clean_pass_duration_lower == 10 * rep.clean_pass_duration_upper);
    CHECK(rig.device.frame_count == 10 * rig.cd.layout.frame_count());
}

TEST_CASE("priority scheduling visits essential frames first and wins on latency")
{
    // synthetic memory: 8 one-word frames, only frames 6 and 7 essential
    ScrubMemory mem;
    mem.level = ScrubLevel::Upper;
    Frame f;
    f.words = {0};
    f.check = {0};
    f.check[0] = 0; // zero word has zero check bits
    mem.frames.assign(8, f);
    mem.golden = mem.frames;
    for (int i = 0; i < 8; ++i)
        mem.bit_location.push_back({i, 0});
    mem.frame_essential = {0, 0, 0, 0, 0, 0, 1, 1};

    std::vector<int> pr = schedule_order(mem, ScrubSchedule::Priority);
    CHECK(pr[0] == 6);
    CHECK(pr[1] == 7);
    std::vector<int> rr = schedule_order(mem, ScrubSchedule::RoundRobin);
    CHECK(rr[0] == 0);

    // upsets in essential frames arriving at pass starts (periodic scrubbing
    // with idle gaps): detection must come no later under priority order
    ScrubConfig cfg;
    cfg.lower = false;
    cfg.period = 4096; // pass duration is 8 * 64 = 512, so passes have idle time
    UpsetTrace trace;
    for (int i = 0; i < 10; ++i)
        trace.events.push_back({int64_t(i + 1) * cfg.period, ScrubLevel::Upper, 6 + (i & 1)});

    cfg.schedule = ScrubSchedule::RoundRobin;
    ScrubMemory m1 = mem;
    ScrubReport rep_rr = run_two_level(&m1, nullptr, trace, cfg);
    cfg.schedule = ScrubSchedule::Priority;
    ScrubMemory m2 = mem;
    ScrubReport rep_pr = run_two_level(&m2, nullptr, trace, cfg);
    CHECK(rep_pr.mean_detection_latency_upper < rep_rr.mean_detection_latency_upper);
    for (size_t i = 0; i < trace.events.size(); ++i)
        CHECK(rep_pr.events[i].detected <= rep_rr.events[i].detected);
}

TEST_CASE("mutually cancelling flips leave memory clean and terminate")
{
    Rig rig;
    ScrubConfig cfg;
    cfg.lower = false;
    UpsetTrace trace;
    trace.events = {{5, ScrubLevel::Upper, 9}, {6, ScrubLevel::Upper, 9}};
    ScrubReport rep = run_two_level(&rig.upper, nullptr, trace, cfg);
    REQUIRE(rep.events.size() == 2);
    CHECK(rep.reconfigurations == 0);
    for (const auto &e : rep.events)
        CHECK(e.corrected >= 0);
}

TEST_CASE("out-of-range trace bits are rejected")
{
    Rig rig;
    ScrubConfig cfg;
    cfg.lower = false;
    UpsetTrace trace;
    trace.events = {{1, ScrubLevel::Upper, rig.cd.layout.total_bits + 5}};
    CHECK_THROWS_AS(run_two_level(&rig.upper, nullptr, trace, cfg), InputError);
}
