#include "spatecon/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace spatecon {

std::optional<std::size_t> CsvTable::column(std::string_view name) const
{
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name)
            return j;
    return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name) const
{
    auto j = column(name);
    if (!j)
        throw std::runtime_error("csv: missing column '" + std::string(name) + "'");
    return *j;
}

CsvTable parse_csv(std::string_view text)
{
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool any_field = false;

    auto flush_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        any_field = true;
    };
    auto flush_record = [&] {
        if (!any_field && record.empty() && field.empty())
            return; // skip blank line
        flush_field();
        if (table.header.empty())
            table.header = std::move(record);
        else
            table.rows.push_back(std::move(record));
        record.clear();
        any_field = false;
    };

    std::size_t i = 0;
    // strip UTF-8 BOM
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
        i = 3;

    for (; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            flush_field();
        } else if (c == '\n') {
            flush_record();
        } else if (c == '\r') {
            // swallow; \n handles the record break
        } else {
            field += c;
        }
    }
    if (in_quotes)
        throw std::runtime_error("csv: unterminated quoted field");
    if (any_field || !field.empty())
        flush_record();

    for (std::size_t r = 0; r < table.rows.size(); ++r)
        if (table.rows[r].size() != table.header.size())
            throw std::runtime_error("csv: row " + std::to_string(r + 2) + " has " +
                                     std::to_string(table.rows[r].size()) + " fields, header has " +
                                     std::to_string(table.header.size()));
    return table;
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {
bool needs_quoting(std::string_view v)
{
    return v.find_first_of(",\"\n\r") != std::string_view::npos;
}
} // namespace

CsvWriter& CsvWriter::cell(std::string_view v)
{
    if (row_started_)
        out_ << ',';
    row_started_ = true;
    if (needs_quoting(v)) {
        out_ << '"';
        for (char c : v) {
            if (c == '"')
                out_ << '"';
            out_ << c;
        }
        out_ << '"';
    } else {
        out_ << v;
    }
    return *this;
}

CsvWriter& CsvWriter::cell(double v)
{
    return cell(format_double(v));
}

CsvWriter& CsvWriter::cell(long long v)
{
    return cell(std::to_string(v));
}

CsvWriter& CsvWriter::endrow()
{
    out_ << '\n';
    row_started_ = false;
    return *this;
}

} // namespace spatecon
