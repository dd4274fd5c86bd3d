#pragma once

#include <cise/frontend.hpp>

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace cise::test {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string spec_source(const std::string& name) { return read_file(std::string(CISE_SPEC_DIR) + "/" + name); }

inline std::shared_ptr<const TypedSpec> load_shared(const std::string& source) {
    return std::make_shared<const TypedSpec>(load_spec(source));
}

inline std::shared_ptr<const TypedSpec> bank() { return load_shared(spec_source("bank.cise")); }
inline std::shared_ptr<const TypedSpec> mutex() { return load_shared(spec_source("mutex.cise")); }

// Bank spec with deposit's `amount > 0` weakened to `amount >= -1`.
inline std::string mutant_bank_source() {
    std::string src = spec_source("bank.cise");
    const auto pos = src.find("requires { amount > 0 }");
    src.replace(pos, 23, "requires { amount >= -1 }");
    return src;
}

}  // namespace cise::test
