#pragma once

#include "relic/seu.hpp"

namespace relic {

enum class ScrubLevel { Upper, Lower };
const char *scrub_level_name(ScrubLevel l);

enum class ScrubSchedule { RoundRobin, Priority };
const char *scrub_schedule_name(ScrubSchedule s);
bool scrub_schedule_from_name(std::string_view name, ScrubSchedule &out);

struct ScrubConfig {
    bool upper = true;
    bool lower = true;
    ScrubSchedule schedule = ScrubSchedule::RoundRobin;
    int64_t frame_check_cost = 64;  // T_f
    int64_t frame_write_cost = 64;  // T_w
    int64_t period = 1;             // cycles between pass starts
};

struct UpsetEvent {
    int64_t cycle = 0;
    ScrubLevel level = ScrubLevel::Upper;
    int bit = 0;
};

struct UpsetTrace {
    std::vector<UpsetEvent> events; // cycles non-decreasing
};

UpsetTrace parse_upset_trace(const std::string &csv);
std::string upset_trace_csv(const UpsetTrace &trace);
UpsetTrace random_trace(const BitstreamLayout &layout, const DeviceModel *device, int count,
                        int64_t max_cycle, uint64_t seed);

struct ScrubEventOutcome {
    UpsetEvent upset;
    int64_t detected = -1;
    int64_t corrected = -1; // via_reconfig implies corrected at reconfig end
    bool uncorrectable = false;
    bool via_reconfig = false;
};

struct ScrubPass {
    ScrubLevel level = ScrubLevel::Upper;
    int index = 0;
    int64_t start = 0;
    int64_t end = 0;
    int frames = 0;
    int corrected_frames = 0;
    int uncorrectable_words = 0;
};

struct ScrubReport {
    std::vector<ScrubEventOutcome> events;
    std::vector<ScrubPass> passes;
    int reconfigurations = 0;
    double mean_detection_latency_upper = 0.0;
    double mean_detection_latency_lower = 0.0;
    int64_t max_detection_latency_upper = 0;
    int64_t max_detection_latency_lower = 0;
    int64_t clean_pass_duration_upper = 0;
    int64_t clean_pass_duration_lower = 0;
};

// One memory image being scrubbed: frames of 64-bit payload words with per
// word check bytes, a golden copy for full reconfiguration, a map from
// logical bit index to (frame, offset), and per-frame essential flags.
struct ScrubMemory {
    ScrubLevel level = ScrubLevel::Upper;
    std::vector<Frame> frames;
    std::vector<Frame> golden;
    std::vector<std::pair<int, int>> bit_location; // logical bit -> (frame, offset)
    std::vector<uint8_t> frame_essential;
};

ScrubMemory upper_memory(const BitstreamLayout &layout, const Bitstream &bitstream,
                         const HardenedDesign &design, const Placement &placement);
ScrubMemory lower_memory(const DeviceModel &model);

// Blind-read scrubbing: visit every frame each pass, correct single-bit
// words in place, flag double-bit words and trigger a full reconfiguration.
ScrubReport run_two_level(const ScrubMemory *upper, const ScrubMemory *lower,
                          const UpsetTrace &trace, const ScrubConfig &cfg);

// Frame visit order for one pass under a schedule.
std::vector<int> schedule_order(const ScrubMemory &mem, ScrubSchedule schedule);

} // namespace relic
