#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace strokesave::store {

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A stored blob no longer hashes to its name.
class IntegrityError : public StoreError {
public:
    using StoreError::StoreError;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Record framing: u32 payload length | u32 crc32(payload) | payload, little-endian.
inline constexpr std::size_t kRecordHeader = 8;

std::vector<std::uint8_t> frame_record(std::span<const std::uint8_t> payload);

struct ScanResult {
    std::vector<std::vector<std::uint8_t>> records;
    std::size_t valid_bytes = 0;  // prefix length holding complete, checksummed records
    bool torn = false;            // bytes after valid_bytes were discarded
};

/// Reads records until the first short or checksum-failing one.
ScanResult scan_records(std::span<const std::uint8_t> bytes);

/// Append-only record file. Opening recovers it: a torn or corrupt tail is
/// cut off so later appends follow the last good record.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path, bool sync = true);
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    /// Records present after recovery, in append order.
    const std::vector<std::vector<std::uint8_t>>& recovered() const noexcept { return recovered_; }
    bool recovered_torn_tail() const noexcept { return torn_; }

    void append(std::span<const std::uint8_t> payload);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    bool sync_;
    std::FILE* file_ = nullptr;
    std::vector<std::vector<std::uint8_t>> recovered_;
    bool torn_ = false;
};

/// Content-addressed files named by their SHA-256 digest.
class BlobStore {
public:
    explicit BlobStore(std::filesystem::path dir);

    /// Returns the digest; storing the same bytes twice is a no-op.
    std::string put(std::span<const std::uint8_t> bytes);
    /// Throws StoreError when missing, IntegrityError when the content changed.
    std::vector<std::uint8_t> get(const std::string& digest) const;
    bool contains(const std::string& digest) const;
    std::filesystem::path path_for(const std::string& digest) const;

private:
    std::filesystem::path dir_;
};

}  // namespace strokesave::store
