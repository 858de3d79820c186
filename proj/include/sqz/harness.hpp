#pragma once

#include <concepts>
#include <cstdint>
#include <span>

namespace sqz {

/// Pass count and peak audited working-state size for one run.
struct StreamAccount {
    uint64_t passes = 0;
    uint64_t peak_state_bits = 0;
    uint64_t n = 0;
};

template <typename P>
concept StreamProcessor = requires(P p, uint32_t a) {
    p.push(a);
    p.finish();
    { p.state_size_bits() } -> std::convertible_to<uint64_t>;
};

/// Feeds the input strictly once, in order; the processor interface exposes no
/// rewind, so a second pass is unrepresentable. Polls the self-reported state
/// size every ceil(n/1024) symbols and once more at the end.
template <StreamProcessor P>
StreamAccount run_one_pass(P& proc, std::span<const uint32_t> input) {
    StreamAccount acc;
    acc.n = input.size();
    acc.passes = 1;
    const uint64_t poll = std::max<uint64_t>(1, (input.size() + 1023) / 1024);
    for (size_t i = 0; i < input.size(); ++i) {
        proc.push(input[i]);
        if ((i + 1) % poll == 0)
            acc.peak_state_bits = std::max<uint64_t>(acc.peak_state_bits, proc.state_size_bits());
    }
    proc.finish();
    acc.peak_state_bits = std::max<uint64_t>(acc.peak_state_bits, proc.state_size_bits());
    return acc;
}

} // namespace sqz
