#pragma once

#include <sys/wait.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bbu/disparity.hpp"
#include "bbu/types.hpp"

namespace testutil {

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

/// Runs a shell command, capturing stdout; stderr is dropped unless
/// merge_stderr folds it into the captured stream.
inline CommandResult run_command(const std::string& command, bool merge_stderr = false) {
    CommandResult result;
    FILE* pipe = ::popen((command + (merge_stderr ? " 2>&1" : " 2>/dev/null")).c_str(), "r");
    if (!pipe) return result;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.output.append(buf.data(), got);
    }
    const int status = ::pclose(pipe);
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    return result;
}

/// key=value lines from a command's stdout; '#' comment lines are skipped.
inline std::map<std::string, std::string> parse_kv(const std::string& output) {
    std::map<std::string, std::string> kv;
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("bbu_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline bbu::AnnotatedExample example(std::string id, bbu::GroupTag group, double cost) {
    bbu::AnnotatedExample ex;
    ex.id = std::move(id);
    ex.group = group;
    ex.raw_cost = cost;
    return ex;
}

inline bbu::CostFn raw_cost_fn() {
    return [](const bbu::AnnotatedExample& ex) { return ex.raw_cost.value(); };
}

}  // namespace testutil
