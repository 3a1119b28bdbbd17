#include "minispace/zip.hpp"

#include <cstdint>
#include <algorithm>
#include <cstring>

#include <zlib.h>

#include "minispace/error.hpp"

namespace minispace::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::size_t kEndRecordSize = 22;

std::uint16_t u16(std::string_view b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                      (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t u32(std::string_view b, std::size_t at) {
    return static_cast<std::uint32_t>(u16(b, at)) | (static_cast<std::uint32_t>(u16(b, at + 2)) << 16);
}

void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v & 0xffff));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint32_t crc_of(std::string_view data) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t pos = 0;
    while (pos < data.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - pos, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + pos), chunk);
        pos += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

// Raw inflate; returns false on corrupt input or size mismatch.
bool inflate_raw(std::string_view in, std::size_t expected, std::string& out) {
    out.assign(expected, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) return false;
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(expected);
    const int rc = inflate(&zs, Z_FINISH);
    const bool ok = rc == Z_STREAM_END && zs.total_out == expected;
    inflateEnd(&zs);
    return ok;
}

std::string deflate_raw(std::string_view in) {
    z_stream zs{};
    deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
    std::string out(deflateBound(&zs, static_cast<uLong>(in.size())), '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

std::size_t find_end_record(std::string_view bytes) {
    if (bytes.size() < kEndRecordSize) throw FormatError("not a zip archive: too short");
    const std::size_t last = bytes.size() - kEndRecordSize;
    const std::size_t first = last > 0xffff ? last - 0xffff : 0;
    for (std::size_t pos = last + 1; pos-- > first;) {
        if (u32(bytes, pos) == kEndSig) return pos;
    }
    throw FormatError("not a zip archive: end-of-central-directory record not found");
}

}  // namespace

bool looks_like_archive(std::string_view bytes) {
    return bytes.size() >= 4 && (u32(bytes, 0) == kLocalSig || u32(bytes, 0) == kEndSig);
}

std::vector<Entry> read_archive(std::string_view bytes) {
    const std::size_t end = find_end_record(bytes);
    const std::uint16_t count = u16(bytes, end + 10);
    const std::uint32_t cd_size = u32(bytes, end + 12);
    const std::uint32_t cd_offset = u32(bytes, end + 16);
    if (cd_offset == 0xffffffffu || count == 0xffff) throw FormatError("zip64 archives are not supported");
    if (static_cast<std::uint64_t>(cd_offset) + cd_size > end) throw FormatError("corrupt zip: central directory out of range");

    std::vector<Entry> entries;
    std::size_t pos = cd_offset;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (pos + 46 > end || u32(bytes, pos) != kCentralSig) throw FormatError("corrupt zip: bad central directory entry");
        const std::uint16_t flags = u16(bytes, pos + 8);
        const std::uint16_t method = u16(bytes, pos + 10);
        const std::uint32_t crc = u32(bytes, pos + 16);
        const std::uint32_t comp_size = u32(bytes, pos + 20);
        const std::uint32_t size = u32(bytes, pos + 24);
        const std::uint16_t name_len = u16(bytes, pos + 28);
        const std::uint16_t extra_len = u16(bytes, pos + 30);
        const std::uint16_t comment_len = u16(bytes, pos + 32);
        const std::uint32_t local = u32(bytes, pos + 42);
        if (pos + 46 + name_len > end) throw FormatError("corrupt zip: entry name out of range");
        Entry entry;
        entry.name.assign(bytes.substr(pos + 46, name_len));
        pos += 46 + name_len + extra_len + comment_len;

        if (!entry.name.empty() && entry.name.back() == '/') continue;

        auto fail = [&](std::string why) {
            entry.error = std::move(why);
            entries.push_back(std::move(entry));
        };
        if (flags & 0x1) { fail("encrypted entries are not supported"); continue; }
        if (comp_size == 0xffffffffu || size == 0xffffffffu) { fail("zip64 entries are not supported"); continue; }
        if (static_cast<std::uint64_t>(local) + 30 > bytes.size() || u32(bytes, local) != kLocalSig) {
            fail("local header missing");
            continue;
        }
        const std::uint64_t data_at = static_cast<std::uint64_t>(local) + 30 + u16(bytes, local + 26) + u16(bytes, local + 28);
        if (data_at + comp_size > bytes.size()) { fail("entry data truncated"); continue; }
        const std::string_view raw = bytes.substr(data_at, comp_size);
        if (method == 0) {
            if (comp_size != size) { fail("stored entry size mismatch"); continue; }
            entry.data.assign(raw);
        } else if (method == 8) {
            if (!inflate_raw(raw, size, entry.data)) { fail("corrupt deflate stream"); continue; }
        } else {
            fail("unsupported compression method " + std::to_string(method));
            continue;
        }
        if (crc_of(entry.data) != crc) { entry.data.clear(); fail("CRC mismatch"); continue; }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::string write_archive(const std::vector<Entry>& entries, bool deflate) {
    std::string out;
    std::string central;
    constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
    for (const auto& e : entries) {
        const std::uint32_t crc = crc_of(e.data);
        std::string packed = deflate ? deflate_raw(e.data) : std::string();
        const bool use_deflate = deflate && packed.size() < e.data.size();
        const std::string_view body = use_deflate ? std::string_view(packed) : std::string_view(e.data);
        const auto offset = static_cast<std::uint32_t>(out.size());
        const std::uint16_t method = use_deflate ? 8 : 0;

        put32(out, kLocalSig);
        put16(out, 20);
        put16(out, 0x0800);  // UTF-8 names
        put16(out, method);
        put16(out, 0);
        put16(out, kDosDate);
        put32(out, crc);
        put32(out, static_cast<std::uint32_t>(body.size()));
        put32(out, static_cast<std::uint32_t>(e.data.size()));
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0);
        out += e.name;
        out += body;

        put32(central, kCentralSig);
        put16(central, 20);
        put16(central, 20);
        put16(central, 0x0800);
        put16(central, method);
        put16(central, 0);
        put16(central, kDosDate);
        put32(central, crc);
        put32(central, static_cast<std::uint32_t>(body.size()));
        put32(central, static_cast<std::uint32_t>(e.data.size()));
        put16(central, static_cast<std::uint16_t>(e.name.size()));
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put16(central, 0);
        put32(central, 0);
        put32(central, offset);
        central += e.name;
    }
    const auto cd_offset = static_cast<std::uint32_t>(out.size());
    out += central;
    put32(out, kEndSig);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put16(out, static_cast<std::uint16_t>(entries.size()));
    put32(out, static_cast<std::uint32_t>(central.size()));
    put32(out, cd_offset);
    put16(out, 0);
    return out;
}

}  // namespace minispace::zip
