#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "assertfix/trace/trace.hpp"

namespace assertfix::testsupport {

struct SignalSpec {
    std::string name;
    std::uint32_t width = 1;
};

/// Uniform random values; each sample is unknown with probability `x_rate`.
trace::CounterexampleTrace random_trace(std::mt19937_64& rng, const std::vector<SignalSpec>& signals,
                                        std::size_t length, double x_rate = 0.0, const std::string& clock = "clk");

/// Build a trace from explicit rows of known values (one vector per signal).
trace::CounterexampleTrace make_trace(const std::vector<std::pair<SignalSpec, std::vector<std::uint64_t>>>& columns,
                                      const std::string& clock = "clk");

} // namespace assertfix::testsupport
