#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skegtd {

struct Dataset {
    std::vector<double> values;
    std::optional<std::vector<double>> covariate;  ///< x column for regression
    std::string source;
    bool had_header = false;
    std::size_t rows_skipped = 0;
    std::vector<std::string> skip_reasons;  ///< "line N: reason"
};

struct CsvOptions {
    bool with_covariate = false;  ///< expect "x,y" rows
    std::size_t value_column = 0; ///< used when with_covariate is false
};

/// Separators: comma, semicolon, tab or blanks. A non-numeric first row is a
/// header. Blank, short or non-finite rows are skipped and counted. Throws
/// InsufficientData when no usable row remains.
Dataset parse_csv(std::string_view text, const CsvOptions& opt = {}, std::string source = "<memory>");
Dataset load_csv(const std::string& path, const CsvOptions& opt = {});

/// Shortest round-trippable decimal form (17 significant digits).
std::string format_double(double v);
/// One value per line.
std::string format_column(std::span<const double> v);

/// FNV-1a 64-bit digest, hex.
std::string digest_hex(std::string_view bytes);

}  // namespace skegtd
