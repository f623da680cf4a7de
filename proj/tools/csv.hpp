#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace smpc::cli {

/// Shortest decimal form that round-trips (std::to_chars), '.' separator.
std::string format_number(double value);

/// Minimal CSV writer: LF line endings, one leading '#' metadata line.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::string_view comment,
              const std::vector<std::string>& header);

    CsvWriter& field(double value);
    CsvWriter& field(long long value);
    CsvWriter& field(std::string_view text);
    CsvWriter& empty();
    void end_row();

private:
    void separator();

    std::ofstream out_;
    bool row_started_ = false;
};

}  // namespace smpc::cli
