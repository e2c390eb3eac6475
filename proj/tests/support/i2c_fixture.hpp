#pragma once

#include <memory>
#include <string>
#include <vector>

#include "assertfix/cdfg/cdfg.hpp"
#include "assertfix/hdl/design.hpp"
#include "assertfix/hdl/sva.hpp"
#include "assertfix/trace/trace.hpp"

namespace assertfix::testsupport {

std::string i2c_dir();
hdl::DesignAst i2c_design();
const cdfg::DesignCdfg& i2c_cdfg();

/// Scripted Wishbone traffic: reset, register writes, then reads where every
/// read of address 4 is followed by a read of address 5.
trace::CounterexampleTrace i2c_trace();

/// The bundled assertion list (name, text).
std::vector<std::pair<std::string, std::string>> i2c_assertions();

} // namespace assertfix::testsupport
