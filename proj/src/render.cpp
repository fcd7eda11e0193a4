#include "embviz/render.hpp"

#include <algorithm>
#include <cmath>

#include "embviz/csv.hpp"
#include "embviz/error.hpp"

namespace embviz::render {

namespace {

const char* kSvgHeader = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

std::string num(double v) { return csv::format_double(v); }

void append_circle(std::string& out, double cx, double cy, double r, const std::string& fill) {
    out += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" +
           fill + "\"/>\n";
}

void append_rect(std::string& out, double x, double y, double w, double h,
                 const std::string& fill, const std::string& stroke) {
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
}

/// Shared affine data->pixel transform. The same scale applies to every
/// panel; a panel only adds a horizontal pixel offset.
struct Transform {
    double x_min = 0.0, y_min = 0.0;
    double x_scale = 1.0, y_scale = 1.0;
    double margin = 0.0, height = 0.0;

    double px(double x) const { return margin + (x - x_min) * x_scale; }
    double py(double y) const { return height - margin - (y - y_min) * y_scale; }
};

Transform make_transform(double x_min, double x_max, double y_min, double y_max,
                         const PlotStyle& style) {
    Transform t;
    t.margin = style.margin_px;
    t.height = style.height_px;
    const double inner_w = style.width_px - 2.0 * style.margin_px;
    const double inner_h = style.height_px - 2.0 * style.margin_px;
    double x_span = x_max - x_min;
    double y_span = y_max - y_min;
    if (x_span <= 0.0) { // degenerate extent: center the points
        x_min -= 0.5;
        x_span = 1.0;
    }
    if (y_span <= 0.0) {
        y_min -= 0.5;
        y_span = 1.0;
    }
    t.x_min = x_min;
    t.y_min = y_min;
    t.x_scale = inner_w / x_span;
    t.y_scale = inner_h / y_span;
    return t;
}

void validate_style(const PlotStyle& style) {
    if (style.width_px < 1 || style.height_px < 1) throw Error("plot dimensions must be positive");
    if (style.point_radius <= 0.0) throw Error("point_radius must be positive");
    if (style.margin_px < 0) throw Error("margin_px must be >= 0");
    if (style.class_palette.empty()) throw Error("class palette must be non-empty");
    if (2 * style.margin_px >= style.width_px || 2 * style.margin_px >= style.height_px)
        throw Error("margins leave no drawing area");
}

std::string class_color(const PlotStyle& style, int label) {
    const std::size_t n = style.class_palette.size();
    const std::size_t idx =
        static_cast<std::size_t>(((label % static_cast<int>(n)) + static_cast<int>(n)) %
                                 static_cast<int>(n));
    return style.class_palette[idx].hex();
}

} // namespace

std::string Rgb::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out = "#";
    for (const std::uint8_t v : {r, g, b}) {
        out += digits[v >> 4];
        out += digits[v & 0xf];
    }
    return out;
}

std::vector<Rgb> default_palette() {
    return {
        {31, 119, 180}, {255, 127, 14}, {44, 160, 44},  {214, 39, 40},
        {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127},
        {188, 189, 34}, {23, 190, 207}, {174, 199, 232}, {255, 187, 120},
    };
}

std::string render_map_panels(const Matrix& coords, std::span<const int> labels,
                              std::span<const Split> splits, const PlotStyle& style) {
    validate_style(style);
    const std::size_t n = coords.rows();
    if (n == 0) throw Error("render_map_panels: no points");
    if (coords.cols() != 2) throw Error("render_map_panels: coords must be N x 2");
    if (labels.size() != n || splits.size() != n)
        throw Error("render_map_panels: labels/splits size mismatch");

    double x_min = coords(0, 0), x_max = coords(0, 0);
    double y_min = coords(0, 1), y_max = coords(0, 1);
    for (std::size_t i = 1; i < n; ++i) {
        x_min = std::min(x_min, coords(i, 0));
        x_max = std::max(x_max, coords(i, 0));
        y_min = std::min(y_min, coords(i, 1));
        y_max = std::max(y_max, coords(i, 1));
    }
    const Transform t = make_transform(x_min, x_max, y_min, y_max, style);

    const int total_width = 3 * style.width_px;
    std::string svg = kSvgHeader;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(total_width) + "\" height=\"" + std::to_string(style.height_px) +
           "\" viewBox=\"0 0 " + std::to_string(total_width) + " " +
           std::to_string(style.height_px) + "\">\n";

    const struct {
        const char* id;
        Split only;
        bool by_class;
    } panels[3] = {
        {"panel-train", Split::train, true},
        {"panel-test", Split::test, true},
        {"panel-overlay", Split::train, false},
    };
    for (int panel = 0; panel < 3; ++panel) {
        const double offset = static_cast<double>(panel) * style.width_px;
        svg += "<g id=\"" + std::string(panels[panel].id) + "\">\n";
        append_rect(svg, offset + 0.5, 0.5, style.width_px - 1.0, style.height_px - 1.0, "none",
                    "#cccccc");
        for (std::size_t i = 0; i < n; ++i) {
            if (panels[panel].by_class && splits[i] != panels[panel].only) continue;
            const std::string fill =
                panels[panel].by_class
                    ? class_color(style, labels[i])
                    : (splits[i] == Split::train ? style.train_color.hex()
                                                 : style.test_color.hex());
            append_circle(svg, offset + t.px(coords(i, 0)), t.py(coords(i, 1)),
                          style.point_radius, fill);
        }
        svg += "</g>\n";
    }

    // two-entry legend on the overlay panel
    const double lx = 2.0 * style.width_px + 8.0;
    svg += "<g id=\"legend\">\n";
    append_rect(svg, lx, 8.0, 10.0, 10.0, style.train_color.hex(), "none");
    svg += "<text x=\"" + num(lx + 14.0) + "\" y=\"" + num(17.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\">train</text>\n";
    append_rect(svg, lx, 24.0, 10.0, 10.0, style.test_color.hex(), "none");
    svg += "<text x=\"" + num(lx + 14.0) + "\" y=\"" + num(33.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\">test</text>\n";
    svg += "</g>\n</svg>\n";
    return svg;
}

std::string render_scatter(std::span<const analysis::ScatterPoint> points,
                           const PlotStyle& style) {
    validate_style(style);
    if (points.empty()) throw Error("render_scatter: no points");

    double lo = -1.0, hi = 1.0;
    for (const auto& pt : points) {
        lo = std::min({lo, pt.s_same, pt.s_diff});
        hi = std::max({hi, pt.s_same, pt.s_diff});
    }
    const Transform t = make_transform(lo, hi, lo, hi, style);

    std::string svg = kSvgHeader;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(style.width_px) + "\" height=\"" + std::to_string(style.height_px) +
           "\" viewBox=\"0 0 " + std::to_string(style.width_px) + " " +
           std::to_string(style.height_px) + "\">\n";
    append_rect(svg, 0.5, 0.5, style.width_px - 1.0, style.height_px - 1.0, "none", "#cccccc");
    // y = x reference: endpoints at equal data values
    svg += "<line x1=\"" + num(t.px(lo)) + "\" y1=\"" + num(t.py(lo)) + "\" x2=\"" +
           num(t.px(hi)) + "\" y2=\"" + num(t.py(hi)) + "\" stroke=\"#888888\"/>\n";
    for (const auto& pt : points) {
        append_circle(svg, t.px(pt.s_same), t.py(pt.s_diff), style.point_radius,
                      pt.correct ? style.test_color.hex() : style.train_color.hex());
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace embviz::render
