#pragma once

// Shared test helpers: random data generators, finite differences, and a
// small XML well-formedness checker for the SVG output.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "embviz/dataset.hpp"
#include "embviz/matrix.hpp"
#include "embviz/rng.hpp"

namespace testsupport {

using embviz::EmbeddingSet;
using embviz::Matrix;
using embviz::Rng;
using embviz::Split;

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = scale * rng.gaussian();
    return m;
}

inline Matrix unit_rows(Matrix m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double len = embviz::norm(m.row(r));
        for (double& v : m.row(r)) v /= len;
    }
    return m;
}

/// Random unit-norm set: class count in [2, max_classes], class sizes in
/// [min_per_class, max_per_class], all rows tagged train.
inline EmbeddingSet random_unit_set(Rng& rng, int max_classes, int min_per_class,
                                    int max_per_class, std::size_t dim) {
    const int classes = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_classes - 1)));
    EmbeddingSet set;
    std::vector<std::size_t> sizes;
    std::size_t n = 0;
    for (int c = 0; c < classes; ++c) {
        const std::size_t size =
            min_per_class + rng.below(static_cast<std::uint64_t>(max_per_class - min_per_class + 1));
        sizes.push_back(size);
        n += size;
    }
    set.vectors = Matrix(n, dim);
    std::size_t r = 0;
    for (int c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < sizes[c]; ++i, ++r) {
            set.ids.push_back("r" + std::to_string(r));
            set.labels.push_back(c);
            set.splits.push_back(Split::train);
            for (std::size_t d = 0; d < dim; ++d) set.vectors(r, d) = rng.gaussian();
            const double len = embviz::norm(set.vectors.row(r));
            for (double& v : set.vectors.row(r)) v /= len;
        }
    }
    return set;
}

/// Central difference of a scalar function w.r.t. one coordinate of x.
inline double central_diff(const std::function<double()>& f, double& x, double h = 1e-5) {
    const double saved = x;
    x = saved + h;
    const double fp = f();
    x = saved - h;
    const double fm = f();
    x = saved;
    return (fp - fm) / (2.0 * h);
}

inline double rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

// ---------------------------------------------------------------------------
// minimal XML well-formedness checker (enough for the SVG this project emits)

struct XmlReport {
    bool ok = false;
    std::string error;
    int roots = 0;
    std::map<std::string, int> tag_counts; // opening + self-closing tags
};

inline XmlReport check_xml(std::string_view text) {
    XmlReport rep;
    std::vector<std::string> stack;
    std::size_t i = 0;
    const std::size_t n = text.size();
    const auto fail = [&](const std::string& why) {
        rep.error = why;
        return rep;
    };
    while (i < n) {
        const char c = text[i];
        if (c != '<') {
            if (c == '>') return fail("stray '>' outside a tag");
            ++i;
            continue;
        }
        if (text.substr(i, 4) == "<!--") {
            const std::size_t end = text.find("-->", i + 4);
            if (end == std::string_view::npos) return fail("unterminated comment");
            i = end + 3;
            continue;
        }
        if (text.substr(i, 2) == "<?") {
            const std::size_t end = text.find("?>", i + 2);
            if (end == std::string_view::npos) return fail("unterminated declaration");
            i = end + 2;
            continue;
        }
        const bool closing = i + 1 < n && text[i + 1] == '/';
        std::size_t j = i + (closing ? 2 : 1);
        std::string name;
        while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '-' ||
                         text[j] == '_' || text[j] == ':'))
            name += text[j++];
        if (name.empty()) return fail("tag without a name");
        // scan to '>' honoring quoted attribute values
        bool self_closing = false;
        char quote = 0;
        for (; j < n; ++j) {
            const char t = text[j];
            if (quote) {
                if (t == quote) quote = 0;
            } else if (t == '"' || t == '\'') {
                quote = t;
            } else if (t == '<') {
                return fail("'<' inside tag " + name);
            } else if (t == '>') {
                self_closing = j > i && text[j - 1] == '/';
                break;
            }
        }
        if (j >= n) return fail("unterminated tag " + name);
        if (closing) {
            if (stack.empty()) return fail("closing tag " + name + " with empty stack");
            if (stack.back() != name)
                return fail("mismatched closing tag " + name + ", expected " + stack.back());
            stack.pop_back();
        } else {
            ++rep.tag_counts[name];
            if (stack.empty()) ++rep.roots;
            if (!self_closing) stack.push_back(name);
        }
        i = j + 1;
    }
    if (!stack.empty()) return fail("unclosed tag " + stack.back());
    if (rep.roots != 1) return fail("expected exactly 1 root element, found " +
                                    std::to_string(rep.roots));
    rep.ok = true;
    return rep;
}

/// All attribute maps for a given tag name, in document order.
inline std::vector<std::map<std::string, std::string>> parse_tags(std::string_view text,
                                                                  std::string_view tag) {
    std::vector<std::map<std::string, std::string>> out;
    const std::string open = "<" + std::string(tag);
    std::size_t pos = 0;
    while ((pos = text.find(open, pos)) != std::string_view::npos) {
        const char after = pos + open.size() < text.size() ? text[pos + open.size()] : '\0';
        if (after != ' ' && after != '>' && after != '/') {
            pos += open.size();
            continue;
        }
        const std::size_t end = text.find('>', pos);
        if (end == std::string_view::npos) break;
        std::map<std::string, std::string> attrs;
        std::size_t i = pos + open.size();
        while (i < end) {
            while (i < end && (text[i] == ' ' || text[i] == '/')) ++i;
            std::string key;
            while (i < end && text[i] != '=' && text[i] != ' ' && text[i] != '/') key += text[i++];
            if (i >= end || text[i] != '=') break;
            ++i; // '='
            if (i >= end || text[i] != '"') break;
            ++i;
            std::string value;
            while (i < end && text[i] != '"') value += text[i++];
            ++i; // closing quote
            attrs[key] = value;
        }
        out.push_back(std::move(attrs));
        pos = end + 1;
    }
    return out;
}

} // namespace testsupport
