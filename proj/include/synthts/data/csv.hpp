#ifndef SYNTHTS_DATA_CSV_HPP
#define SYNTHTS_DATA_CSV_HPP

#include <cstddef>
#include <filesystem>
#include <vector>

namespace synthts::data {

// Reads one numeric column (0-based) from a comma-separated text file after
// skipping `skip_rows` leading lines. Parsing is locale-independent ('.' as
// decimal separator). Blank lines are ignored. Missing files, non-numeric or
// non-finite cells and short rows raise DataError naming file and line.
std::vector<double> read_csv_column(const std::filesystem::path& path, std::size_t column, std::size_t skip_rows = 0);

// Parses a decimal number, rejecting trailing garbage and non-finite values.
// Returns false on failure.
bool parse_finite(std::string_view text, double& out);

}  // namespace synthts::data

#endif  // SYNTHTS_DATA_CSV_HPP
