#pragma once

#include "config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace mdyn::cli {

struct RunContext {
    std::string command;
    Experiment exp;
    std::string config_text;
    std::filesystem::path out;
    int threads = 1;
};

std::string sha256_hex(const std::string& data);
std::string version_string();

void write_manifest(const RunContext& ctx, const std::filesystem::path& dir);

void cmd_generate(const RunContext& ctx);
void cmd_train(const RunContext& ctx);
void cmd_predict(const RunContext& ctx);
void cmd_evaluate(const RunContext& ctx);
void cmd_oracle(const RunContext& ctx);

// Full command line; returns the process exit code.
// 0 ok, 1 other failure, 2 config or usage error, 3 divergence, 4 I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdyn::cli
