#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace kinehier::io {

/// Little-endian byte sink/source independent of host byte order.
class ByteWriter {
public:
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    const std::vector<unsigned char>& buffer() const { return buf_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
    }
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<unsigned char>& buf) : buf_(buf) {}
    bool at_end() const { return pos_ >= buf_.size(); }
    std::size_t remaining() const { return buf_.size() - pos_; }
    std::size_t position() const { return pos_; }
    bool u16(std::uint16_t& v) { return get(v); }
    bool u32(std::uint32_t& v) { return get(v); }
    bool f32(float& v) {
        std::uint32_t bits = 0;
        if (!get(bits)) return false;
        v = std::bit_cast<float>(bits);
        return true;
    }
    bool bytes(std::string& out, std::size_t n) {
        if (remaining() < n) return false;
        out.assign(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return true;
    }

private:
    template <typename T>
    bool get(T& v) {
        if (remaining() < sizeof(T)) return false;
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) acc |= std::uint64_t{buf_[pos_ + i]} << (8 * i);
        v = static_cast<T>(acc);
        pos_ += sizeof(T);
        return true;
    }
    const std::vector<unsigned char>& buf_;
    std::size_t pos_ = 0;
};

} // namespace kinehier::io
