// csv.hpp -- minimal CSV reading/writing helpers used by the dataset loader
// and the report emitters.
//
// Scope: header row + plain comma-separated fields, UTF-8, '.' decimal point.
// Quoting is supported for reading (double quotes, RFC-4180 style) because
// real-world extracts occasionally quote labels; writing never quotes since
// all emitted fields are numeric or simple identifiers.

#ifndef VSIV_CSV_HPP
#define VSIV_CSV_HPP

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsiv {
namespace csv {

// One parsed line split into fields.  Empty input lines yield an empty vector.
inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\r') {
            // tolerate CRLF
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

// Whole-file table: header + rows.  Lines starting with '#' are treated as
// comments (our own reports carry a '#' provenance header).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name, or -1.
    int column(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        return -1;
    }
};

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    if (!have_header) throw std::runtime_error("empty input: " + path);
    return t;
}

// Strict double parse; returns nullopt on any trailing garbage.
inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end == nullptr || *end != '\0') return std::nullopt;
    return v;
}

// Writer with a '#'-prefixed provenance header block.
class Writer {
public:
    explicit Writer(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
    }
    void comment(const std::string& text) { out_ << "# " << text << "\n"; }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j) out_ << ',';
            out_ << fields[j];
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

}  // namespace csv
}  // namespace vsiv

#endif  // VSIV_CSV_HPP
