#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ipfspipe/errors.hpp"

namespace ipfspipe {

// base58btc: the Bitcoin alphabet, no 0/O/I/l.
inline constexpr std::string_view kBase58Alphabet =
    "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

namespace detail {
inline const std::array<int8_t, 256>& base58_rev_table() {
    static const std::array<int8_t, 256> table = [] {
        std::array<int8_t, 256> t{};
        t.fill(-1);
        for (std::size_t i = 0; i < kBase58Alphabet.size(); ++i)
            t[static_cast<unsigned char>(kBase58Alphabet[i])] = static_cast<int8_t>(i);
        return t;
    }();
    return table;
}
} // namespace detail

inline std::string base58btc_encode(const std::uint8_t* data, std::size_t len) {
    // Count leading zero bytes; each maps to a leading '1'.
    std::size_t zeros = 0;
    while (zeros < len && data[zeros] == 0) ++zeros;

    // Big-integer base conversion, digits little-endian in `b58`.
    std::vector<std::uint8_t> b58((len - zeros) * 138 / 100 + 1, 0);
    std::size_t length = 0;
    for (std::size_t i = zeros; i < len; ++i) {
        int carry = data[i];
        std::size_t j = 0;
        for (auto it = b58.begin(); (carry != 0 || j < length) && it != b58.end(); ++it, ++j) {
            carry += 256 * (*it);
            *it = static_cast<std::uint8_t>(carry % 58);
            carry /= 58;
        }
        length = j;
    }

    std::string out(zeros, '1');
    for (std::size_t i = 0; i < length; ++i)
        out.push_back(kBase58Alphabet[b58[length - 1 - i]]);
    return out;
}

inline std::string base58btc_encode(const std::vector<std::uint8_t>& data) {
    return base58btc_encode(data.data(), data.size());
}

inline std::vector<std::uint8_t> base58btc_decode(std::string_view text) {
    const auto& rev = detail::base58_rev_table();

    std::size_t zeros = 0;
    while (zeros < text.size() && text[zeros] == '1') ++zeros;

    std::vector<std::uint8_t> bytes((text.size() - zeros) * 733 / 1000 + 1, 0);
    std::size_t length = 0;
    for (std::size_t i = zeros; i < text.size(); ++i) {
        int carry = rev[static_cast<unsigned char>(text[i])];
        if (carry < 0)
            throw Error(ErrorKind::invalid_argument,
                        "not a base58btc string: " + std::string(text));
        std::size_t j = 0;
        for (auto it = bytes.begin(); (carry != 0 || j < length) && it != bytes.end(); ++it, ++j) {
            carry += 58 * (*it);
            *it = static_cast<std::uint8_t>(carry % 256);
            carry /= 256;
        }
        length = j;
    }

    std::vector<std::uint8_t> out(zeros, 0);
    out.reserve(zeros + length);
    for (std::size_t i = 0; i < length; ++i) out.push_back(bytes[length - 1 - i]);
    return out;
}

inline bool is_base58btc(std::string_view text) {
    const auto& rev = detail::base58_rev_table();
    for (char c : text)
        if (rev[static_cast<unsigned char>(c)] < 0) return false;
    return !text.empty();
}

} // namespace ipfspipe
