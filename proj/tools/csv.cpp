#include "csv.hpp"

#include <charconv>
#include <cmath>

#include <smpc/errors.hpp>

namespace smpc::cli {

std::string format_number(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view comment,
                     const std::vector<std::string>& header)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out_ << "# " << comment << '\n';
    for (const auto& name : header) {
        field(name);
    }
    end_row();
}

void CsvWriter::separator()
{
    if (row_started_) {
        out_ << ',';
    }
    row_started_ = true;
}

CsvWriter& CsvWriter::field(double value)
{
    separator();
    out_ << format_number(value);
    return *this;
}

CsvWriter& CsvWriter::field(long long value)
{
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::field(std::string_view text)
{
    separator();
    out_ << text;
    return *this;
}

CsvWriter& CsvWriter::empty()
{
    separator();
    return *this;
}

void CsvWriter::end_row()
{
    out_ << '\n';
    row_started_ = false;
}

}  // namespace smpc::cli
