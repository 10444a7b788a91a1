#include "treebec/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "treebec/error.hpp"

namespace treebec::io {

const char* version() { return TREEBEC_VERSION; }

std::string header_line(const std::string& config_hash) {
    return std::string("# treebec ") + version() + " config " + config_hash;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Csv::Csv(std::vector<std::string> columns, std::string config_hash) : width_(columns.size()) {
    body_ = header_line(config_hash) + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) body_ += (i ? "," : "") + columns[i];
    body_ += "\n";
}

void Csv::row(const std::vector<double>& values) {
    if (values.size() != width_) throw PreconditionError("csv row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) body_ += (i ? "," : "") + format_double(values[i]);
    body_ += "\n";
}

std::string Csv::text() const { return body_; }

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write " + path.string());
}

void log_event(const std::filesystem::path& dir, const std::string& message) {
    std::filesystem::create_directories(dir);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    std::ofstream(dir / "run.log", std::ios::app) << stamp << " " << message << "\n";
}

}  // namespace treebec::io
