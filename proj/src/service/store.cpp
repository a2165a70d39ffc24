#include "strokesave/store.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>

namespace strokesave::store {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw StoreError("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_hex_digest(const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
    uLong c = ::crc32(0L, Z_NULL, 0);
    // zlib takes a uInt length; feed large inputs in pieces.
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        c = ::crc32(c, bytes.data() + off, n);
        off += n;
    }
    return static_cast<std::uint32_t>(c);
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw StoreError("sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::vector<std::uint8_t> frame_record(std::span<const std::uint8_t> payload) {
    if (payload.size() > 0xffffffffu) throw StoreError("record too large");
    std::vector<std::uint8_t> out;
    out.reserve(kRecordHeader + payload.size());
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    put_u32(out, crc32(payload));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

ScanResult scan_records(std::span<const std::uint8_t> bytes) {
    ScanResult r;
    std::size_t off = 0;
    while (off < bytes.size()) {
        if (bytes.size() - off < kRecordHeader) break;
        const std::uint32_t len = get_u32(bytes.data() + off);
        const std::uint32_t crc = get_u32(bytes.data() + off + 4);
        if (bytes.size() - off - kRecordHeader < len) break;
        const auto payload = bytes.subspan(off + kRecordHeader, len);
        if (crc32(payload) != crc) break;
        r.records.emplace_back(payload.begin(), payload.end());
        off += kRecordHeader + len;
    }
    r.valid_bytes = off;
    r.torn = off != bytes.size();
    return r;
}

EventLog::EventLog(std::filesystem::path path, bool sync) : path_(std::move(path)), sync_(sync) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    if (std::filesystem::exists(path_)) {
        const auto bytes = slurp(path_);
        ScanResult scan = scan_records(bytes);
        recovered_ = std::move(scan.records);
        torn_ = scan.torn;
        if (torn_) std::filesystem::resize_file(path_, scan.valid_bytes);
    }
    file_ = std::fopen(path_.c_str(), "ab");
    if (!file_) throw StoreError("cannot open log " + path_.string() + ": " + std::strerror(errno));
}

EventLog::~EventLog() {
    if (file_) std::fclose(file_);
}

void EventLog::append(std::span<const std::uint8_t> payload) {
    const auto rec = frame_record(payload);
    if (std::fwrite(rec.data(), 1, rec.size(), file_) != rec.size() || std::fflush(file_) != 0) {
        throw StoreError("write to " + path_.string() + " failed");
    }
    if (sync_ && ::fdatasync(::fileno(file_)) != 0) throw StoreError("fdatasync failed on " + path_.string());
}

BlobStore::BlobStore(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::filesystem::path BlobStore::path_for(const std::string& digest) const {
    if (!is_hex_digest(digest)) throw StoreError("malformed digest '" + digest + "'");
    return dir_ / digest.substr(0, 2) / digest;
}

bool BlobStore::contains(const std::string& digest) const { return std::filesystem::exists(path_for(digest)); }

std::string BlobStore::put(std::span<const std::uint8_t> bytes) {
    const std::string digest = sha256_hex(bytes);
    const auto target = path_for(digest);
    if (std::filesystem::exists(target)) return digest;
    std::filesystem::create_directories(target.parent_path());
    // Write then rename so a crash never leaves a half blob under its final name.
    const auto tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw StoreError("cannot write blob " + tmp);
    }
    std::filesystem::rename(tmp, target);
    return digest;
}

std::vector<std::uint8_t> BlobStore::get(const std::string& digest) const {
    const auto p = path_for(digest);
    if (!std::filesystem::exists(p)) throw StoreError("blob " + digest + " not found");
    auto bytes = slurp(p);
    const std::string actual = sha256_hex(bytes);
    if (actual != digest) throw IntegrityError("blob " + digest + " hashes to " + actual);
    return bytes;
}

}  // namespace strokesave::store
