#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace umivr::text {

// Whitespace-separated token count.
std::size_t word_count(std::string_view s);

// Keeps the first `max_words` whitespace tokens, joined by single spaces.
// Text within the limit is returned unchanged.
std::string truncate_words(std::string_view s, std::size_t max_words);

// Lowercased ASCII alphanumeric runs.
std::vector<std::string> terms(std::string_view s);

std::string trim(std::string_view s);

std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace umivr::text
