#pragma once

// Conversions between the human-scale units used in configuration files and
// CSV output (µs, ms, Gbps, MB, Mbit) and the internal units (seconds, bits,
// bits/second). One byte is 8 bits; MB and Mbit are decimal.

namespace tmt::units {

inline constexpr double kBitsPerByte = 8.0;

constexpr double us_to_s(double us) { return us / 1e6; }
constexpr double ms_to_s(double ms) { return ms / 1e3; }
constexpr double s_to_us(double s) { return s * 1e6; }
constexpr double s_to_ms(double s) { return s * 1e3; }

constexpr double gbps_to_bps(double gbps) { return gbps * 1e9; }
constexpr double bps_to_gbps(double bps) { return bps / 1e9; }

constexpr double bytes_to_bits(double bytes) { return bytes * kBitsPerByte; }
constexpr double bits_to_bytes(double bits) { return bits / kBitsPerByte; }

constexpr double mb_to_bits(double megabytes) { return megabytes * 1e6 * kBitsPerByte; }
constexpr double bits_to_mb(double bits) { return bits / (1e6 * kBitsPerByte); }

constexpr double mbit_to_bits(double megabits) { return megabits * 1e6; }
constexpr double bits_to_mbit(double bits) { return bits / 1e6; }

}  // namespace tmt::units
