#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>

namespace rpd::detail {

template <typename Float, typename Bits>
void write_le(std::ostream& out, std::span<const Float> values) {
  static_assert(sizeof(Float) == sizeof(Bits));
  unsigned char buf[sizeof(Bits)];
  for (Float v : values) {
    const auto bits = std::bit_cast<Bits>(v);
    for (std::size_t b = 0; b < sizeof(Bits); ++b) buf[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(buf), sizeof buf);
  }
}

template <typename Float, typename Bits>
bool read_le(std::istream& in, std::span<Float> values) {
  static_assert(sizeof(Float) == sizeof(Bits));
  unsigned char buf[sizeof(Bits)];
  for (Float& v : values) {
    if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) return false;
    Bits bits = 0;
    for (std::size_t b = 0; b < sizeof(Bits); ++b) bits |= static_cast<Bits>(buf[b]) << (8 * b);
    v = std::bit_cast<Float>(bits);
  }
  return true;
}

inline void write_le_f32(std::ostream& out, std::span<const float> v) { write_le<float, std::uint32_t>(out, v); }
inline bool read_le_f32(std::istream& in, std::span<float> v) { return read_le<float, std::uint32_t>(in, v); }
inline void write_le_f64(std::ostream& out, std::span<const double> v) { write_le<double, std::uint64_t>(out, v); }
inline bool read_le_f64(std::istream& in, std::span<double> v) { return read_le<double, std::uint64_t>(in, v); }

}  // namespace rpd::detail
