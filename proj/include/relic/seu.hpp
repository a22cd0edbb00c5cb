#pragma once

#include <optional>

#include "relic/sim.hpp"

namespace relic {

// Returns a copy with the listed payload bits flipped. Check bits are left
// stale: a real upset corrupts payload only, and scrubbing must notice.
Bitstream inject(const Bitstream &bits, std::span<const int> flip, const BitstreamLayout &layout);

enum class BitClass { Benign, Detected, Sdc };
const char *bit_class_name(BitClass c);

struct CampaignScope {
    enum class Kind { All, Random, ResourceFilter, List };
    Kind kind = Kind::All;
    int sample = 0;            // Random
    BitKind filter = BitKind::FuOp; // ResourceFilter
    std::vector<int> bits;     // List

    static CampaignScope all() { return {}; }
    static CampaignScope random(int n) { return {Kind::Random, n, BitKind::FuOp, {}}; }
    static CampaignScope resource(BitKind k) { return {Kind::ResourceFilter, 0, k, {}}; }
    static CampaignScope list(std::vector<int> b)
    {
        return {Kind::List, 0, BitKind::FuOp, std::move(b)};
    }
};

struct SensitivityMap {
    struct Entry {
        int bit = 0;
        BitClass cls = BitClass::Benign;
    };
    std::vector<Entry> entries; // ascending bit index
    int vectors = 0;
    uint64_t seed = 0;
    std::string scope;
    int64_t simulations = 0; // deterministic work counter

    std::optional<BitClass> class_of(int bit) const;
    std::map<std::pair<BitKind, BitClass>, int> totals(const BitstreamLayout &layout) const;
};

// Exhaustive (or scoped) single-bit flip campaign: flip, simulate every
// vector, classify against the golden evaluator, restore. Aborts if the
// fault-free baseline does not match the oracle.
SensitivityMap run_campaign(const CompiledDesign &cd,
                            std::span<const std::vector<Word>> vectors, const CampaignScope &scope,
                            uint64_t seed, int jobs = 1);

std::string sensitivity_csv(const SensitivityMap &map, const BitstreamLayout &layout);

// Counts 2-bit adjacent-cell MBU scenarios that would touch replica bits of
// two different replicas of one triple; zero under separation >= 2.
int adjacent_replica_conflicts(const HardenedDesign &design, const Placement &placement);

// Abstract lower-level device model: synthetic frames holding the static
// logic image of each overlay resource plus a 1:1 image of every overlay
// configuration bit.
struct DeviceBit {
    enum class Kind { Static, ConfigImage };
    Kind kind = Kind::Static;
    CellCoord owner;
    int overlay_bit = -1; // ConfigImage only
    bool essential = false;
};

struct DeviceModel {
    int frame_count = 0;
    int bits_per_frame = 0;
    std::vector<DeviceBit> bits; // padded tail bits are not listed
    std::vector<std::pair<int, int>> bit_location; // device bit -> (frame, offset)
    std::vector<uint8_t> frame_essential;

    int total_bits() const { return int(bits.size()); }
};

// Static device-bit cost of one overlay FU; CB/SB config bits cost one
// device bit each (their image is their footprint).
int static_cost(FuKind kind);

// Upper-level essential-bit mask: FU/CB bits of used cells plus switch bits
// set in the golden bitstream.
std::vector<uint8_t> essential_upper_bits(const BitstreamLayout &layout,
                                          const HardenedDesign &design,
                                          const Placement &placement, const Bitstream &bitstream);

DeviceModel build_device_model(const FabricArch &arch, const BitstreamLayout &layout,
                               const HardenedDesign &design, const Placement &placement,
                               const Bitstream &bitstream, int frame_multiple = 10);

// Conservative lower-level classification: essential static bits -> sdc,
// unused static bits -> benign, config images inherit the upper-level class.
std::vector<BitClass> lower_sensitivity(const DeviceModel &model, const SensitivityMap &upper);

} // namespace relic
