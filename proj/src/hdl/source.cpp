#include "assertfix/hdl/source.hpp"

namespace assertfix::hdl {

std::string SourcePos::to_string() const {
    return std::to_string(line) + ":" + std::to_string(column);
}

std::string SourceSpan::to_string() const {
    if (begin_line == end_line) return "line " + std::to_string(begin_line);
    return "lines " + std::to_string(begin_line) + "-" + std::to_string(end_line);
}

SourceSpan join(const SourceSpan& first, const SourceSpan& last) {
    SourceSpan s = first;
    s.end = last.end;
    s.end_line = last.end_line;
    return s;
}

} // namespace assertfix::hdl
