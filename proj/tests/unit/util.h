#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "chaselab/chase.h"
#include "chaselab/parser.h"

namespace testutil {

inline std::string corpus(const std::string& rel) { return std::string(CHASELAB_CORPUS_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in) << path;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline chaselab::Program program(const std::string& text) {
    auto r = chaselab::parseProgram(text);
    EXPECT_TRUE(r.ok()) << r.message();
    return r.ok() ? *r.value : chaselab::Program{};
}

inline chaselab::Program corpusProgram(const std::string& name) {
    return program(slurp(corpus("programs/" + name + ".dlge")));
}

inline chaselab::Instance instance(const std::string& text, const chaselab::Signature& sig) {
    auto r = chaselab::parseInstance(text, sig);
    EXPECT_TRUE(r.ok()) << r.message();
    return r.ok() ? *r.value : chaselab::Instance(sig);
}

inline chaselab::ChaseConfig config(chaselab::Variant v, std::size_t maxSteps = 100000) {
    chaselab::ChaseConfig c;
    c.variant = v;
    c.maxSteps = maxSteps;
    return c;
}

}  // namespace testutil
