#include "i2c_fixture.hpp"

#include "cycle_sim.hpp"

namespace assertfix::testsupport {

std::string i2c_dir() { return std::string(ASSERTFIX_SOURCE_DIR) + "/corpus/i2c"; }

hdl::DesignAst i2c_design() {
    return hdl::parse_design_files({i2c_dir() + "/rtl/i2c_master_top.v", i2c_dir() + "/rtl/i2c_master_byte_ctrl.v"});
}

const cdfg::DesignCdfg& i2c_cdfg() {
    static const cdfg::DesignCdfg g = cdfg::build_cdfg(i2c_design());
    return g;
}

namespace {

struct Cycle {
    int cyc, we, adr, dat, rst;
};

// Data lines carry junk whenever no write is in progress.
int junk(const std::vector<Cycle>& s) { return (0x3D * static_cast<int>(s.size()) + 0x17) & 0xFF; }

void idle(std::vector<Cycle>& s) { s.push_back({0, 0, 7, junk(s), 0}); }

void write(std::vector<Cycle>& s, int adr, int dat) {
    s.push_back({1, 1, adr, dat, 0});
    s.push_back({1, 1, adr, dat, 0});
    idle(s);
}

void read_burst(std::vector<Cycle>& s, const std::vector<int>& adrs) {
    for (int a : adrs) s.push_back({1, 0, a, junk(s), 0});
    idle(s);
}

} // namespace

trace::CounterexampleTrace i2c_trace() {
    std::vector<Cycle> script;
    script.push_back({0, 0, 7, 0, 1});
    script.push_back({0, 0, 7, 0, 0});
    write(script, 3, 0xAB);
    write(script, 2, 0x40);
    write(script, 0, 0x31);
    write(script, 1, 0x02);
    read_burst(script, {4, 5, 2, 0, 1});
    write(script, 3, 0x5C);
    read_burst(script, {2, 4, 5, 6, 3});
    write(script, 2, 0x41);
    read_burst(script, {0, 2, 2, 4, 5});
    write(script, 3, 0x96);
    read_burst(script, {1, 4, 5, 2, 6});
    write(script, 1, 0x05);
    read_burst(script, {1, 0, 3});
    idle(script);
    CycleSim sim(i2c_cdfg());
    return sim.run(
        static_cast<int>(script.size()),
        [&](int c, CycleSim& s) {
            const auto& x = script[static_cast<std::size_t>(c)];
            s.set("wb_rst_i", static_cast<std::uint64_t>(x.rst));
            s.set("arst_i", 0);
            s.set("wb_cyc_i", static_cast<std::uint64_t>(x.cyc));
            s.set("wb_stb_i", static_cast<std::uint64_t>(x.cyc));
            s.set("wb_we_i", static_cast<std::uint64_t>(x.we));
            s.set("wb_adr_i", static_cast<std::uint64_t>(x.adr));
            s.set("wb_dat_i", static_cast<std::uint64_t>(x.dat));
        },
        "wb_clk_i");
}

std::vector<std::pair<std::string, std::string>> i2c_assertions() {
    return {
        {"read_txr", "assert property (@(posedge wb_clk_i) (wb_adr_i == 3'b100) |-> ##1 (wb_dat_o == $past(txr)));"},
        {"ack_delay", "assert property (@(posedge wb_clk_i) (wb_cyc_i && wb_stb_i && !wb_ack_o) |-> ##2 wb_ack_o);"},
        {"txr_write", "assert property (@(posedge wb_clk_i) (wb_we_i && wb_ack_o && wb_adr_i == 3'b011) |-> ##2 (txr == $past(wb_dat_i)));"},
        {"ctr_write", "assert property (@(posedge wb_clk_i) (wb_we_i && wb_ack_o && wb_adr_i == 3'b011) |-> ##1 (ctr == $past(wb_dat_i)));"},
        {"read_ctr", "assert property (@(posedge wb_clk_i) (wb_adr_i == 3'b010) |-> ##1 (wb_dat_o == $past(txr)));"},
        {"read_prer_lo", "assert property (@(posedge wb_clk_i) (wb_adr_i == 3'b000) |-> ##1 (wb_dat_o == $past(prer[7:0])));"},
        {"prer_hi_write", "assert property (@(posedge wb_clk_i) (wb_we_i && wb_ack_o && wb_adr_i == 3'b001) |-> ##1 (prer[15:8] == ~$past(wb_dat_i)));"},
        {"ack_pulse", "assert property (@(posedge wb_clk_i) wb_ack_o |-> ##1 wb_ack_o);"},
    };
}

} // namespace assertfix::testsupport
