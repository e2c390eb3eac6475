#include "assertfix/error.hpp"

#include <sstream>

namespace assertfix {

namespace {

std::string describe_syntax(const std::string& message, const hdl::SourcePos& pos,
                            const std::vector<std::string>& expected) {
    std::ostringstream os;
    os << pos.to_string() << ": " << message;
    if (!expected.empty()) {
        os << " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) os << (i + 1 == expected.size() ? " or " : ", ");
            os << expected[i];
        }
        os << ")";
    }
    return os.str();
}

std::string join_cycle(const std::vector<std::string>& cycle) {
    std::string out = "combinational loop: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i) out += " -> ";
        out += cycle[i];
    }
    return out;
}

} // namespace

SyntaxError::SyntaxError(std::string message, hdl::SourcePos pos, std::vector<std::string> expected)
    : Error(describe_syntax(message, pos, expected)), pos_(pos), expected_(std::move(expected)) {}

UnsupportedConstruct::UnsupportedConstruct(std::string construct, hdl::SourceSpan span)
    : Error("unsupported construct '" + construct + "' at " + span.to_string()),
      construct_(std::move(construct)),
      span_(span) {}

UnresolvedIdentifier::UnresolvedIdentifier(std::string name, std::string module, hdl::SourceSpan span)
    : Error("unresolved identifier '" + name + "' in module '" + module + "' at " + span.to_string()),
      name_(std::move(name)),
      module_(std::move(module)),
      span_(span) {}

UnsupportedSvaFeature::UnsupportedSvaFeature(std::string feature, hdl::SourcePos pos)
    : Error(pos.to_string() + ": unsupported SVA feature: " + feature), feature_(std::move(feature)), pos_(pos) {}

CombinationalLoop::CombinationalLoop(std::vector<std::string> cycle)
    : Error(join_cycle(cycle)), cycle_(std::move(cycle)) {}

UnknownSignal::UnknownSignal(std::string name) : Error("unknown signal '" + name + "'"), name_(std::move(name)) {}

VcdSyntaxError::VcdSyntaxError(std::string message, int line)
    : Error("VCD line " + std::to_string(line) + ": " + message), line_(line) {}

MissingClock::MissingClock(std::string clock) : Error("clock '" + clock + "' not found in VCD") {}

SignalMissing::SignalMissing(std::string name)
    : Error("signal '" + name + "' missing from trace"), name_(std::move(name)) {}

FixtureMiss::FixtureMiss(std::string hash)
    : Error("no replay fixture for prompt hash " + hash), hash_(std::move(hash)) {}

} // namespace assertfix
