#include "fansim/framing.hpp"

#include <algorithm>

namespace fansim {

BitStream bytes_to_bits(std::span<const std::uint8_t> bytes) {
    BitStream bits;
    bits.reserve(bytes.size() * 8);
    for (std::uint8_t b : bytes) {
        for (int i = 7; i >= 0; --i) {
            bits.push_back(static_cast<std::uint8_t>((b >> i) & 1));
        }
    }
    return bits;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(bits.size() / 8);
    for (std::size_t i = 0; i + 8 <= bits.size(); i += 8) {
        std::uint8_t b = 0;
        for (std::size_t j = 0; j < 8; ++j) {
            b = static_cast<std::uint8_t>((b << 1) | (bits[i + j] & 1));
        }
        bytes.push_back(b);
    }
    return bytes;
}

BitStream encode_frames(std::span<const std::uint8_t> payload) {
    const BitStream payload_bits = bytes_to_bits(payload);
    BitStream out;
    if (payload_bits.empty()) return out;

    const std::size_t n_frames =
        (payload_bits.size() + kPayloadBitsPerFrame - 1) / kPayloadBitsPerFrame;
    out.reserve(n_frames * kFrameBits);

    for (std::size_t f = 0; f < n_frames; ++f) {
        out.insert(out.end(), kPreamble.begin(), kPreamble.end());
        for (std::size_t j = 0; j < kPayloadBitsPerFrame; ++j) {
            const std::size_t idx = f * kPayloadBitsPerFrame + j;
            out.push_back(idx < payload_bits.size() ? payload_bits[idx] : 0);
        }
    }
    return out;
}

DecodedFrames decode_frames(const BitStream& bits, std::optional<std::size_t> payload_len) {
    DecodedFrames result;
    result.report.frames_total = bits.size() / kFrameBits;
    result.report.trailing_bits = bits.size() % kFrameBits;

    result.payload_bits.reserve(result.report.frames_total * kPayloadBitsPerFrame);

    for (std::size_t f = 0; f < result.report.frames_total; ++f) {
        const std::size_t base = f * kFrameBits;
        const bool preamble_ok = std::equal(kPreamble.begin(), kPreamble.end(), bits.begin() + base);
        if (!preamble_ok) {
            result.report.preamble_errors.push_back(f);
            continue;  // never fabricate payload bits for a failed frame
        }
        for (std::size_t j = 0; j < kPayloadBitsPerFrame; ++j) {
            result.payload_bits.push_back(bits[base + kPreamble.size() + j]);
        }
    }

    result.payload = bits_to_bytes(result.payload_bits);
    if (payload_len && result.payload.size() > *payload_len) {
        result.payload.resize(*payload_len);
    }
    return result;
}

}  // namespace fansim
