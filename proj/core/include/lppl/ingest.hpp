#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lppl/model.hpp"
#include "lppl/weights.hpp"

namespace lppl {

/// Which CSV column holds the closing price: a header name or a 0-based position.
/// When neither is set the first header among close, adj close, price is used,
/// falling back to the last column.
struct ColumnSpec {
    std::optional<std::string> name;
    std::optional<std::size_t> position;

    /// All digits selects by position, anything else by name.
    static ColumnSpec parse(const std::string& text);
};

/// Closing prices in file order. Row r of the file becomes trading period r (1-based);
/// calendar gaps are ignored.
struct RawSeries {
    std::vector<std::string> dates;  ///< empty when the file has no date column
    std::vector<double> closes;
    std::string source;
    std::vector<std::string> warnings;
};

/// Comma-separated, optional header line, UTF-8. Rows whose close is missing,
/// unparsable or not strictly positive raise InputError naming the file line.
RawSeries load_csv(const std::filesystem::path& path, const ColumnSpec& column = {});
RawSeries parse_csv(std::istream& in, const ColumnSpec& column = {}, const std::string& source = "<stream>");

/// Log-transforms the closes and attaches the weights of `scheme`.
PriceSeries to_series(const RawSeries& raw, const WeightScheme& scheme);

}  // namespace lppl
