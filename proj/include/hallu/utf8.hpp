#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace hallu::utf8 {

/// Decodes UTF-8 into Unicode scalar values. Invalid sequences decode to
/// U+FFFD one byte at a time so offsets stay defined for any input.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);

/// Number of scalar values in `text`.
std::size_t length(std::string_view text);

/// Scalar-value slice [start, end) of UTF-8 `text`.
std::string slice(std::string_view text, std::size_t start, std::size_t end);

}  // namespace hallu::utf8
