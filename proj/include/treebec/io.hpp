#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace treebec::io {

const char* version();

// `# treebec <version> config <hash>`
std::string header_line(const std::string& config_hash);

// Floats print with 17 significant digits so they read back bit-exact.
std::string format_double(double x);

class Csv {
public:
    Csv(std::vector<std::string> columns, std::string config_hash);
    void row(const std::vector<double>& values);
    std::string text() const;

private:
    std::string body_;
    std::size_t width_;
};

void write_file(const std::filesystem::path& path, const std::string& text);

// Appends a timestamped line to <dir>/run.log; the only place wall-clock time appears.
void log_event(const std::filesystem::path& dir, const std::string& message);

}  // namespace treebec::io
