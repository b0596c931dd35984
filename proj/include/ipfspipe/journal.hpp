#pragma once

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include "ipfspipe/errors.hpp"

namespace ipfspipe {

// Append-only newline-delimited journal. Each append is a single write()
// followed by fsync, so a killed process leaves only whole lines behind.
class AppendJournal {
public:
    AppendJournal() = default;

    explicit AppendJournal(const std::filesystem::path& path) { open(path); }

    AppendJournal(AppendJournal&& other) noexcept : fd_(other.fd_), path_(std::move(other.path_)) {
        other.fd_ = -1;
    }
    AppendJournal& operator=(AppendJournal&& other) noexcept {
        if (this != &other) {
            close();
            fd_ = other.fd_;
            path_ = std::move(other.path_);
            other.fd_ = -1;
        }
        return *this;
    }
    AppendJournal(const AppendJournal&) = delete;
    AppendJournal& operator=(const AppendJournal&) = delete;

    ~AppendJournal() { close(); }

    void open(const std::filesystem::path& path) {
        close();
        path_ = path;
        fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0)
            throw Error(ErrorKind::io_error,
                        "cannot open journal " + path.string() + ": " + std::strerror(errno));
    }

    bool is_open() const noexcept { return fd_ >= 0; }
    const std::filesystem::path& path() const noexcept { return path_; }

    void append_line(const std::string& line, bool sync = true) {
        std::string buf = line;
        buf.push_back('\n');
        ssize_t n = ::write(fd_, buf.data(), buf.size());
        if (n != static_cast<ssize_t>(buf.size())) {
            ErrorKind kind = (errno == ENOSPC) ? ErrorKind::storage_full : ErrorKind::io_error;
            throw Error(kind, "journal write failed on " + path_.string() + ": " +
                                  std::strerror(errno));
        }
        if (sync && ::fsync(fd_) != 0)
            throw Error(ErrorKind::io_error,
                        "journal fsync failed on " + path_.string() + ": " + std::strerror(errno));
    }

    void close() noexcept {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
    std::filesystem::path path_;
};

// Reads a journal back as whole lines. A final chunk without its newline is
// a torn write and is reported as corruption rather than silently dropped.
inline std::vector<std::string> read_journal_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io_error, "cannot read journal " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos)
            throw Error(ErrorKind::journal_corrupt,
                        "truncated trailing record in " + path.string());
        lines.push_back(content.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

} // namespace ipfspipe
