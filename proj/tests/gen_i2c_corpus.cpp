// Writes the bundled I2C assertion list and one counterexample trace per assertion.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "assertfix/trace/trace.hpp"
#include "i2c_fixture.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_i2c_corpus DIR\n";
        return 64;
    }
    namespace fs = std::filesystem;
    fs::path dir = argv[1];
    fs::create_directories(dir / "traces");
    auto vcd = assertfix::trace::write_vcd(assertfix::testsupport::i2c_trace());
    std::ofstream list(dir / "assertions.sva", std::ios::binary);
    list << "// bundled assertions, one per line\n";
    for (const auto& [name, text] : assertfix::testsupport::i2c_assertions()) {
        list << name << ": " << text << "\n";
        std::ofstream(dir / "traces" / (name + ".vcd"), std::ios::binary) << vcd;
    }
    return 0;
}
