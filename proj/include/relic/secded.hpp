#pragma once

#include <cstdint>

namespace relic {

// Extended Hamming (72,64): single-error-correct / double-error-detect over
// one 64-bit payload word, 8 check bits per word.
uint8_t secded_check_bits(uint64_t word);

struct Syndrome {
    enum class Kind { Clean, SingleData, SingleCheck, Double };
    Kind kind = Kind::Clean;
    int data_bit = -1;  // corrupted payload bit for SingleData
    int check_bit = -1; // corrupted check bit for SingleCheck

    bool clean() const { return kind == Kind::Clean; }
    bool uncorrectable() const { return kind == Kind::Double; }
};

Syndrome secded_syndrome(uint64_t word, uint8_t check);

} // namespace relic
