#include "relic/secded.hpp"

#include <array>

namespace relic {

namespace {

// Code positions 1..71; powers of two are parity positions, the remaining 64
// hold payload bits in order. Check byte: bits 0..6 = parity p0..p6, bit 7 =
// overall parity of the whole codeword.
struct Tables {
    std::array<int, 72> data_at_pos;  // code position -> payload bit, -1 for parity
    std::array<int, 64> pos_of_data;  // payload bit -> code position

    Tables()
    {
        data_at_pos.fill(-1);
        int d = 0;
        for (int pos = 1; pos <= 71; ++pos) {
            if ((pos & (pos - 1)) == 0)
                continue;
            data_at_pos[pos] = d;
            pos_of_data[d] = pos;
            ++d;
        }
    }
};

const Tables &tables()
{
    static const Tables t;
    return t;
}

uint8_t hamming_parities(uint64_t word)
{
    const Tables &t = tables();
    uint8_t p = 0;
    for (int d = 0; d < 64; ++d) {
        if ((word >> d) & 1) {
            int pos = t.pos_of_data[d];
            for (int i = 0; i < 7; ++i)
                if ((pos >> i) & 1)
                    p ^= uint8_t(1) << i;
        }
    }
    return p;
}

int popcount64(uint64_t v) { return __builtin_popcountll(v); }

} // namespace

uint8_t secded_check_bits(uint64_t word)
{
    uint8_t check = hamming_parities(word);
    int ones = popcount64(word) + popcount64(check & 0x7f);
    if (ones & 1)
        check |= 0x80;
    return check;
}

Syndrome secded_syndrome(uint64_t word, uint8_t check)
{
    const Tables &t = tables();
    const uint8_t expect = hamming_parities(word);
    const int s = (expect ^ check) & 0x7f; // nonzero = position of a single flip
    const int overall =
        (popcount64(word) + popcount64(uint64_t(check))) & 1; // stored codeword parity

    Syndrome out;
    if (s == 0 && overall == 0)
        return out;
    if (s == 0) {
        out.kind = Syndrome::Kind::SingleCheck;
        out.check_bit = 7; // the overall parity bit itself
        return out;
    }
    if (overall == 0) {
        out.kind = Syndrome::Kind::Double;
        return out;
    }
    if ((s & (s - 1)) == 0) {
        // A parity position: index of the flipped check bit.
        int idx = 0;
        while ((1 << idx) != s)
            ++idx;
        out.kind = Syndrome::Kind::SingleCheck;
        out.check_bit = idx;
        return out;
    }
    if (s <= 71 && t.data_at_pos[s] >= 0) {
        out.kind = Syndrome::Kind::SingleData;
        out.data_bit = t.data_at_pos[s];
        return out;
    }
    out.kind = Syndrome::Kind::Double; // syndrome outside the code: multi-bit
    return out;
}

} // namespace relic
