#pragma once

#include <cstddef>
#include <string>

namespace assertfix::hdl {

/// A point in a source text. Lines and columns are 1-based.
struct SourcePos {
    int file = 0;
    int line = 1;
    int column = 1;
    std::size_t offset = 0;

    std::string to_string() const;
};

/// Half-open byte range [begin, end) plus the inclusive line range it covers.
struct SourceSpan {
    int file = 0;
    int begin_line = 0;
    int end_line = 0;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool contains(const SourceSpan& other) const noexcept {
        return file == other.file && begin <= other.begin && other.end <= end;
    }
    bool overlaps(const SourceSpan& other) const noexcept {
        return file == other.file && begin < other.end && other.begin < end;
    }
    std::string to_string() const;
};

SourceSpan join(const SourceSpan& first, const SourceSpan& last);

} // namespace assertfix::hdl
