#ifndef SPATECON_CSV_HPP
#define SPATECON_CSV_HPP

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace spatecon {

/// A parsed CSV document. The first record is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
    std::size_t require_column(std::string_view name) const;
};

/// Parses quoted/unquoted CSV with "." decimal separator. Accepts both LF
/// and CRLF line endings; a UTF-8 BOM on the first cell is stripped.
CsvTable parse_csv(std::string_view text);

/// Shortest decimal representation that round-trips to the same double.
/// Used everywhere a report is written so reruns are byte-identical.
std::string format_double(double v);

/// Streaming CSV writer with RFC-4180 quoting.
class CsvWriter {
public:
    CsvWriter& cell(std::string_view v);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& endrow();
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
    bool row_started_ = false;
};

} // namespace spatecon

#endif
