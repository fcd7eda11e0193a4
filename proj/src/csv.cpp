#include "embviz/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "embviz/error.hpp"

namespace embviz::csv {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_int(long long value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string quote_field(std::string_view field) {
    const bool needs_quoting = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quoting) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (const char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<Record> parse_text(std::string_view text) {
    std::vector<Record> records;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        Record rec;
        rec.line = line;
        std::string field;
        bool in_quotes = false;
        bool done = false;
        while (!done) {
            if (i >= n) {
                if (in_quotes) throw Error("line " + std::to_string(rec.line) + ": unterminated quoted field");
                rec.fields.push_back(std::move(field));
                break;
            }
            const char c = text[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    if (c == '\n') ++line;
                    field.push_back(c);
                    ++i;
                }
            } else if (c == '"' && field.empty()) {
                in_quotes = true;
                ++i;
            } else if (c == ',') {
                rec.fields.push_back(std::move(field));
                field.clear();
                ++i;
            } else if (c == '\n') {
                rec.fields.push_back(std::move(field));
                ++line;
                ++i;
                done = true;
            } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
                rec.fields.push_back(std::move(field));
                ++line;
                i += 2;
                done = true;
            } else {
                field.push_back(c);
                ++i;
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<Record> parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

} // namespace embviz::csv
