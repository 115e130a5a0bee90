#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fansim {

// Ordered binary symbols; every element is 0 or 1.
using BitStream = std::vector<std::uint8_t>;

// On-air frame layout, transmitted left to right in time:
//   [1 0 1 0][p11 p10 ... p0]
// four preamble bits followed by twelve payload bits.
inline constexpr std::array<std::uint8_t, 4> kPreamble = {1, 0, 1, 0};
inline constexpr std::size_t kPayloadBitsPerFrame = 12;
inline constexpr std::size_t kFrameBits = kPreamble.size() + kPayloadBitsPerFrame;

struct FrameReport {
    std::size_t frames_total = 0;
    std::vector<std::size_t> preamble_errors;  // indices of frames whose preamble failed
    std::size_t trailing_bits = 0;             // leftover bits (stream not a multiple of 16)
};

struct DecodedFrames {
    std::vector<std::uint8_t> payload;
    BitStream payload_bits;  // concatenated 12-bit groups before byte packing
    FrameReport report;
};

// Packs payload bytes (bits taken MSB-first within each byte) into 12-bit
// groups, zero-padding the final group, and prefixes each group with the
// preamble. Empty payload yields an empty stream.
BitStream encode_frames(std::span<const std::uint8_t> payload);

// Inverse of encode_frames. Scans 16-bit frames, drops frames whose preamble
// does not match (recording their indices), concatenates the surviving 12-bit
// payload groups and repacks them MSB-first into bytes. Padding is stripped
// using payload_len when the caller knows it (the frame format itself carries
// no length); otherwise all full bytes are emitted and a final partial byte
// is discarded.
DecodedFrames decode_frames(const BitStream& bits,
                            std::optional<std::size_t> payload_len = std::nullopt);

// Bits of a byte sequence, MSB-first per byte. Exposed for tests and the
// error-rate harness.
BitStream bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

}  // namespace fansim
