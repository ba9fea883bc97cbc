#include "skegtd/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skegtd/errors.hpp"

namespace skegtd {
namespace {

std::vector<std::string_view> fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    const auto is_sep = [](char c) { return c == ',' || c == ';' || c == '\t' || c == ' '; };
    const bool has_hard = line.find_first_of(",;\t") != std::string_view::npos;
    while (i <= line.size()) {
        std::size_t j = i;
        if (has_hard) {
            while (j < line.size() && line[j] != ',' && line[j] != ';' && line[j] != '\t') ++j;
        } else {
            while (i < line.size() && is_sep(line[i])) ++i;
            if (i == line.size()) break;
            j = i;
            while (j < line.size() && !is_sep(line[j])) ++j;
        }
        std::string_view f = line.substr(i, j - i);
        while (!f.empty() && (f.front() == ' ' || f.front() == '"')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '"')) f.remove_suffix(1);
        out.push_back(f);
        if (j >= line.size()) break;
        i = j + 1;
    }
    return out;
}

bool parse_number(std::string_view s, double& v) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

Dataset parse_csv(std::string_view text, const CsvOptions& opt, std::string source) {
    Dataset d;
    d.source = std::move(source);
    if (opt.with_covariate) d.covariate.emplace();
    std::size_t lineno = 0, pos = 0;
    bool first_content = true;
    auto skip = [&](const std::string& why) {
        ++d.rows_skipped;
        d.skip_reasons.push_back("line " + std::to_string(lineno) + ": " + why);
    };
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        const bool last = eol >= text.size();
        pos = eol + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (!(last && line.empty())) skip("blank");
            if (last) break;
            continue;
        }
        const auto f = fields(line);
        const std::size_t need = opt.with_covariate ? 2 : opt.value_column + 1;
        double x = 0.0, y = 0.0;
        bool ok = f.size() >= need;
        if (ok) {
            if (opt.with_covariate)
                ok = parse_number(f[0], x) && parse_number(f[1], y);
            else
                ok = parse_number(f[opt.value_column], y);
        }
        if (!ok) {
            if (first_content && !f.empty() && !parse_number(f[0], x)) {
                d.had_header = true;
            } else {
                skip(f.size() < need ? "too few fields" : "not a number");
            }
        } else if (!std::isfinite(x) || !std::isfinite(y)) {
            skip("non-finite value");
        } else {
            d.values.push_back(y);
            if (d.covariate) d.covariate->push_back(x);
        }
        first_content = false;
        if (last) break;
    }
    if (d.values.empty()) throw InsufficientData("no usable rows in " + d.source);
    return d;
}

Dataset load_csv(const std::string& path, const CsvOptions& opt) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InsufficientData("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str(), opt, path);
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_column(std::span<const double> v) {
    std::string out;
    out.reserve(v.size() * 20);
    for (double x : v) {
        out += format_double(x);
        out += '\n';
    }
    return out;
}

std::string digest_hex(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace skegtd
