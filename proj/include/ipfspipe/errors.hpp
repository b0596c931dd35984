#pragma once

#include <stdexcept>
#include <string>

namespace ipfspipe {

enum class ErrorKind {
    not_found,           // unknown CID or missing record
    integrity_mismatch,  // stored bytes no longer hash to their CID
    backend_unreachable, // remote daemon down or refusing connections (retriable)
    storage_full,        // local disk write failure
    index_out_of_range,  // ledger record index >= count
    journal_corrupt,     // unparseable or truncated journal
    link_invalid,        // chain fails hash/link verification
    root_missing,        // watched directory vanished
    fetch_failed,        // content could not be fetched for chain append
    invalid_argument,    // malformed CID, empty CID, bad config, out-of-range input
    io_error,            // everything else the OS throws at us
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::not_found: return "not-found";
        case ErrorKind::integrity_mismatch: return "integrity-mismatch";
        case ErrorKind::backend_unreachable: return "backend-unreachable";
        case ErrorKind::storage_full: return "storage-full";
        case ErrorKind::index_out_of_range: return "index-out-of-range";
        case ErrorKind::journal_corrupt: return "journal-corrupt";
        case ErrorKind::link_invalid: return "link-invalid";
        case ErrorKind::root_missing: return "root-missing";
        case ErrorKind::fetch_failed: return "fetch-failed";
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::io_error: return "io-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Retriable errors are transient (daemon restart, network blip); callers
    // may retry the same call. Everything else is fatal for that operation.
    bool retriable() const noexcept { return kind_ == ErrorKind::backend_unreachable; }

private:
    ErrorKind kind_;
};

} // namespace ipfspipe
