#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "taskshare/config.hpp"

namespace support {

namespace fs = std::filesystem;

inline fs::path sample_dir() { return TASKSHARE_SAMPLE_DIR; }

/// Fresh empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("taskshare-test-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline taskshare::PipelineConfig sample_config(const fs::path& out) {
    taskshare::PipelineConfig cfg;
    taskshare::apply_config_file(cfg, sample_dir() / "taskshare.conf");
    cfg.output_dir = out;
    return cfg;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Empty string when both directories hold the same files with the same bytes,
/// otherwise the first difference.
inline std::string compare_dirs(const fs::path& a, const fs::path& b) {
    std::set<std::string> names_a, names_b;
    for (const auto& e : fs::directory_iterator(a)) names_a.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(b)) names_b.insert(e.path().filename().string());
    if (names_a != names_b) return "different file sets";
    for (const auto& n : names_a) {
        if (slurp(a / n) != slurp(b / n)) return "contents differ: " + n;
    }
    return {};
}

struct RunResult {
    int exit_code = -1;
    std::string err;
};

/// Runs the CLI through the shell with stderr captured.
inline RunResult run_cli(const std::string& args, const fs::path& scratch, const std::string& env = {}) {
    const auto err_file = scratch / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + std::string(TASKSHARE_CLI) + "\" " + args +
                            " > /dev/null 2> \"" + err_file.string() + "\"";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_file);
    fs::remove(err_file);
    return r;
}

}  // namespace support
