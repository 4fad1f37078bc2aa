#include "abr/util.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace abr {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    ensure_parent_dirs(path);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

void ensure_parent_dirs(const std::string& path) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

void ensure_dir(const std::string& path) {
    if (!path.empty()) std::filesystem::create_directories(path);
}

std::string resolve_out_path(const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    const char* root = std::getenv("ABR_OUT_DIR");
    if (!root || !*root) return path;
    return (std::filesystem::path(root) / path).string();
}

}  // namespace abr
