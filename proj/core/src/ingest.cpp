#include "lppl/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lppl/error.hpp"

namespace lppl {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(first, last - first + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::optional<double> to_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::optional<std::size_t> find_header(const std::vector<std::string>& header, const std::string& name) {
    const std::string wanted = lower(name);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (lower(header[c]) == wanted) return c;
    }
    return std::nullopt;
}

}  // namespace

ColumnSpec ColumnSpec::parse(const std::string& text) {
    ColumnSpec spec;
    if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
        spec.position = std::stoul(text);
    } else {
        spec.name = text;
    }
    return spec;
}

RawSeries parse_csv(std::istream& in, const ColumnSpec& column, const std::string& source) {
    RawSeries raw;
    raw.source = source;

    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (trim(line).empty()) continue;
        rows.emplace_back(line_no, split(line));
    }
    if (rows.empty()) throw InputError(source + ": no data rows");

    const auto& first = rows.front().second;
    const bool has_header = std::none_of(first.begin(), first.end(), [](const std::string& f) {
        return to_number(f).has_value();
    });
    std::vector<std::string> header;
    if (has_header) {
        header = first;
        rows.erase(rows.begin());
    }
    if (rows.empty()) throw InputError(source + ": no data rows after the header");
    const std::size_t width = rows.front().second.size();

    std::size_t close_col = width - 1;
    if (column.position) {
        close_col = *column.position;
    } else if (column.name) {
        if (!has_header) throw InputError(source + ": column '" + *column.name + "' requested but file has no header");
        const auto found = find_header(header, *column.name);
        if (!found) throw InputError(source + ": no column named '" + *column.name + "'");
        close_col = *found;
    } else if (has_header) {
        for (const char* name : {"close", "adj close", "price"}) {
            if (auto found = find_header(header, name)) {
                close_col = *found;
                break;
            }
        }
    }
    if (has_header && close_col >= header.size()) {
        throw InputError(source + ": column " + std::to_string(close_col) + " does not exist");
    }

    std::optional<std::size_t> date_col;
    if (has_header) {
        date_col = find_header(header, "date");
    } else if (close_col != 0 && !to_number(rows.front().second[0])) {
        date_col = 0;
    }

    raw.closes.reserve(rows.size());
    for (const auto& [line_no, fields] : rows) {
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if (close_col >= fields.size()) throw InputError(where + "missing close column");
        const auto value = to_number(fields[close_col]);
        if (!value || !std::isfinite(*value)) {
            throw InputError(where + "cannot parse close '" + fields[close_col] + "'");
        }
        if (!(*value > 0.0)) throw InputError(where + "close must be strictly positive, got " + fields[close_col]);
        raw.closes.push_back(*value);
        if (date_col) {
            raw.dates.push_back(*date_col < fields.size() ? fields[*date_col] : std::string{});
        }
    }
    for (std::size_t r = 1; r < raw.dates.size(); ++r) {
        if (raw.dates[r] < raw.dates[r - 1]) {
            raw.warnings.push_back("dates out of order at data row " + std::to_string(r + 1) + " (" +
                                   raw.dates[r - 1] + " then " + raw.dates[r] + ")");
        }
    }
    return raw;
}

RawSeries load_csv(const std::filesystem::path& path, const ColumnSpec& column) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return parse_csv(in, column, path.string());
}

PriceSeries to_series(const RawSeries& raw, const WeightScheme& scheme) {
    std::vector<double> logp(raw.closes.size());
    std::transform(raw.closes.begin(), raw.closes.end(), logp.begin(), [](double c) { return std::log(c); });
    auto weights = build_weights(scheme, logp.size());
    return PriceSeries(std::move(logp), std::move(weights));
}

}  // namespace lppl
